#pragma once

#include "nlw/dynamics.hpp"
#include "nlw/errors.hpp"
#include "nlw/exciton_model.hpp"
#include "nlw/operator.hpp"
#include "nlw/response.hpp"
#include "nlw/spectrum.hpp"
#include "nlw/witness.hpp"
