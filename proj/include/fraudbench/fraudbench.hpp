#pragma once

#include "fraudbench/classifiers.hpp"
#include "fraudbench/config.hpp"
#include "fraudbench/core.hpp"
#include "fraudbench/ensemble.hpp"
#include "fraudbench/error.hpp"
#include "fraudbench/evaluation.hpp"
#include "fraudbench/features.hpp"
#include "fraudbench/forest.hpp"
#include "fraudbench/harness.hpp"
#include "fraudbench/knn.hpp"
#include "fraudbench/linear.hpp"
#include "fraudbench/naive_bayes.hpp"
#include "fraudbench/random.hpp"
#include "fraudbench/report.hpp"
#include "fraudbench/sampling.hpp"
#include "fraudbench/search.hpp"
