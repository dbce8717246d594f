#ifndef UNMIX_UNMIX_HPP
#define UNMIX_UNMIX_HPP

#include "core_types.hpp"
#include "error.hpp"
#include "evolution.hpp"
#include "extractors.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "synth.hpp"

#endif // UNMIX_UNMIX_HPP
