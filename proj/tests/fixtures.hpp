// Small maps and cheap configurations shared by the slower tests.
#pragma once

#include "fpfuse/dataset.hpp"
#include "fpfuse/pipeline.hpp"

namespace fixture {

inline fpfuse::SynthSpec small_spec(std::uint64_t seed = 1) {
  fpfuse::SynthSpec s;
  s.n_rp = 8;
  s.samples_per_rp = 20;
  s.seed = seed;
  return s;
}

inline fpfuse::PipelineConfig fast_config() {
  fpfuse::PipelineConfig c;
  c.pf.n_particles = 200;
  c.rf.n_trees = 20;
  c.rf.max_depth = 12;
  c.k = 3;
  c.alpha_grid = {0.5, 2.0};
  c.h_grid = {1.0};
  return c;
}

}  // namespace fixture
