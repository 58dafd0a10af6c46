#pragma once

#include "sailor/augmentor/encoder.hpp"
#include "sailor/augmentor/forge.hpp"
#include "sailor/augmentor/objectives.hpp"
#include "sailor/augmentor/sampling.hpp"
#include "sailor/error.hpp"
#include "sailor/gnn/gcn.hpp"
#include "sailor/gnn/metrics.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/homophily.hpp"
#include "sailor/graph/io.hpp"
#include "sailor/graph/partition.hpp"
#include "sailor/graph/preprocess.hpp"
#include "sailor/graph/synthetic.hpp"
#include "sailor/numerics.hpp"
#include "sailor/trainer/config.hpp"
#include "sailor/trainer/report.hpp"
#include "sailor/trainer/sweep.hpp"
#include "sailor/trainer/trainer.hpp"
