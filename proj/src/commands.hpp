#pragma once

#include <string>
#include <vector>

#include "hmmsb/hmmsb.h"
#include "hmmsb/model.hpp"

namespace hmmsb::cmd {

Hyperparams to_hyper(const hmmsb_hyper& h);
/// "none" gives just `base`; "gamma", "lambda" and "both" expand the standard grids.
std::vector<Hyperparams> grid_for(const std::string& name, const Hyperparams& base);

void simulate(const hmmsb_simulate_options& o);
void infer(const hmmsb_infer_options& o);
double eval_f1(const hmmsb_eval_f1_options& o);
double heldout(const hmmsb_heldout_options& o);
void export_dot(const hmmsb_export_dot_options& o);
hmmsb_recount_report recount_check(const std::string& samples_path, const std::string& edges_path);

}  // namespace hmmsb::cmd
