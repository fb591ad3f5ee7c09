#pragma once

// Convenience include for the whole library.

#include "lamde/ann.hpp"
#include "lamde/dataset.hpp"
#include "lamde/errors.hpp"
#include "lamde/eval.hpp"
#include "lamde/eval_csv.hpp"
#include "lamde/geotech.hpp"
#include "lamde/linreg.hpp"
#include "lamde/model_io.hpp"
#include "lamde/rng.hpp"
#include "lamde/scatter_svg.hpp"
