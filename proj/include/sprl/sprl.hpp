#pragma once

#include "sprl/core/adam.hpp"
#include "sprl/core/errors.hpp"
#include "sprl/core/graph.hpp"
#include "sprl/core/lstm.hpp"
#include "sprl/core/ops.hpp"
#include "sprl/core/random.hpp"
#include "sprl/core/tensor.hpp"
#include "sprl/data/catalog.hpp"
#include "sprl/data/embeddings.hpp"
#include "sprl/data/frames.hpp"
#include "sprl/data/instance.hpp"
#include "sprl/data/prep.hpp"
#include "sprl/data/ratings.hpp"
#include "sprl/data/sampling.hpp"
#include "sprl/data/supersense.hpp"
#include "sprl/data/synthetic.hpp"
#include "sprl/eval/compare.hpp"
#include "sprl/eval/metrics.hpp"
#include "sprl/io/csv.hpp"
#include "sprl/model/decoders.hpp"
#include "sprl/model/encoder.hpp"
#include "sprl/model/mt_decoder.hpp"
#include "sprl/model/params.hpp"
#include "sprl/train/ablation.hpp"
#include "sprl/train/checkpoint.hpp"
#include "sprl/train/config.hpp"
#include "sprl/train/experiment.hpp"
#include "sprl/train/model.hpp"
#include "sprl/train/schedule.hpp"
#include "sprl/train/task.hpp"
#include "sprl/train/trainer.hpp"
