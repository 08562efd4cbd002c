#pragma once

#include "lknn/core.hpp"
#include "lknn/neighbours.hpp"
#include "lknn/classify.hpp"
#include "lknn/density.hpp"
#include "lknn/select.hpp"
#include "lknn/distributions.hpp"
#include "lknn/theory.hpp"
#include "lknn/experiments.hpp"
