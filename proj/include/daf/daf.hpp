#pragma once

#include "daf/core.hpp"
#include "daf/driver.hpp"
#include "daf/encoding.hpp"
#include "daf/evaluation.hpp"
#include "daf/fusion.hpp"
#include "daf/io.hpp"
#include "daf/pipeline.hpp"
#include "daf/types.hpp"
