// Copyright 2026 The cosched Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cosched/error.hpp"
#include "cosched/harness.hpp"

namespace cosched {
namespace {

void check_corpus(const Corpus& corpus, const ServerSpec& server, ModelKind model) {
  if (corpus.model != model) {
    throw Error(ErrorCode::kConfig, "corpus was generated for model " +
                                        std::string(model_name(corpus.model)));
  }
  if (corpus.platform_id != server.platform_id) {
    throw Error(ErrorCode::kConfig, "corpus platform " + corpus.platform_id +
                                        " does not match " + server.platform_id);
  }
}

Mlp initial_net(const Mlp& fresh, const Mlp* warm_start) {
  if (!warm_start) return fresh;
  if (!warm_start->same_architecture(fresh)) {
    throw Error(ErrorCode::kStructural, "pretrained network architecture differs");
  }
  Mlp net = *warm_start;
  net.set_dropout_rate(fresh.dropout_rate());
  return net;
}

}  // namespace

TrainOptions default_train_options(ModelKind model) {
  TrainOptions o;
  o.standardize_labels = true;
  o.refit_output_layer = true;
  if (model == ModelKind::kA) {
    o.epochs = 60;
    o.lr_decay = 0.96;
  }
  return o;
}

ModelATraining train_model_a(const ServerSpec& server, const Corpus& corpus,
                             const TrainOptions& options, const Mlp* warm_start) {
  check_corpus(corpus, server, ModelKind::kA);
  Mlp net = initial_net(ModelA(server, options.seed).net(), warm_start);
  ModelATraining out;
  out.report = train_mlp(net, corpus.data, options);
  out.mae_cores = out.report.test_mae(0) * server.n_cores;
  out.mae_ways = out.report.test_mae(1) * server.n_llc_ways;
  out.model = ModelA(server, std::move(net));
  return out;
}

ModelBTraining train_model_b(const ServerSpec& server, const Corpus& corpus,
                             const TrainOptions& options, const Mlp* warm_start) {
  check_corpus(corpus, server, ModelKind::kB);
  Mlp net = initial_net(ModelB(server, options.seed).net(), warm_start);
  ModelBTraining out;
  out.report = train_mlp(net, corpus.data, options);
  const HoldoutSplit split =
      holdout_split(corpus.data.size(), options.train_fraction, options.seed);
  if (!split.test.empty()) {
    const Eigen::MatrixXd pred = net.forward_batch(corpus.data.x(Eigen::all, split.test));
    const Eigen::MatrixXd truth = corpus.data.y(Eigen::all, split.test);
    int agree = 0;
    double abs_err = 0.0;
    for (Eigen::Index i = 0; i < pred.cols(); ++i) {
      const double p = ModelB::decode(pred(0, i));
      const double t = ModelB::decode(truth(0, i));
      agree += (p <= 1.0) == (t <= 1.0);
      abs_err += std::abs(p - t);
    }
    out.indicator_accuracy = static_cast<double>(agree) / static_cast<double>(pred.cols());
    out.mae_ratio = abs_err / static_cast<double>(pred.cols());
  }
  out.model = ModelB(server, std::move(net));
  return out;
}

}  // namespace cosched
