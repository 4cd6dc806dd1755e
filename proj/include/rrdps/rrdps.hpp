#pragma once
#include <rrdps/numerics.hpp>
#include <rrdps/sources.hpp>
#include <rrdps/channel.hpp>
#include <rrdps/rates.hpp>
#include <rrdps/decoy.hpp>
#include <rrdps/optimize.hpp>
#include <rrdps/mc_oracle.hpp>
