#include "xbarft/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "xbarft/rng.hpp"

namespace xbarft {

const char* method_name(Method m) {
  switch (m) {
    case Method::no_voting: return "no_voting";
    case Method::voting: return "voting";
    case Method::voting_embedded: return "voting_embedded";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "no_voting") return Method::no_voting;
  if (name == "voting") return Method::voting;
  if (name == "voting_embedded") return Method::voting_embedded;
  return std::nullopt;
}

PreparedModel prepare_model(const Model& model, const SimOptions& opt, Method method) {
  require(!model.layers.empty(), "prepare_model: empty model");
  PreparedModel prep;
  prep.method = method;
  prep.opt = opt;
  const FlipPolicy flip = method == Method::no_voting ? FlipPolicy::none : opt.flip;
  for (const LayerSpec& layer : model.layers) {
    prep.mapped.push_back(map_layer(quantize(layer.weight, opt.quant), flip));
    prep.biases.push_back(layer.bias);
    prep.pruned.push_back(layer.pruned_cols);
  }
  if (method == Method::voting_embedded) {
    for (std::size_t l = 0; l < prep.mapped.size(); ++l)
      prep.embedded.push_back(
          embed_layer(prep.mapped[l], opt.candidates, prep.pruned[l]));
  }
  return prep;
}

FtNetwork realize_ft(const PreparedModel& prep, const FaultModel& fault) {
  FtConfig cfg;
  cfg.candidates = prep.method == Method::no_voting ? 1 : prep.opt.candidates;
  cfg.flip = prep.method == Method::no_voting ? FlipPolicy::none : prep.opt.flip;
  cfg.fault = fault;
  FtNetwork net;
  for (std::size_t l = 0; l < prep.mapped.size(); ++l)
    net.layers.push_back(duplicate_msb(prep.mapped[l], cfg, l));
  net.biases = prep.biases;
  return net;
}

EmbeddedNetwork realize_embedded(const PreparedModel& prep, const FaultModel& fault) {
  require(prep.method == Method::voting_embedded,
          "realize_embedded: prepared for a different method");
  EmbeddedNetwork net;
  net.layers = prep.embedded;
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    inject_embedded_faults(net.layers[l], fault, l);
  net.biases = prep.biases;
  return net;
}

double trial_accuracy(const PreparedModel& prep, const Dataset& data,
                      double rate, std::uint64_t seed, int trial) {
  FaultModel fault;
  fault.rate = rate;
  fault.sa1_share = prep.opt.sa1_share;
  fault.seed = hash2(seed, static_cast<std::uint64_t>(trial));
  if (prep.method == Method::voting_embedded) {
    const EmbeddedNetwork net = realize_embedded(prep, fault);
    return accuracy_percent(
        [&](std::span<const double> x) { return infer_network_embedded(net, x); },
        data.test_x, data.test_y);
  }
  const FtNetwork net = realize_ft(prep, fault);
  return accuracy_percent(
      [&](std::span<const double> x) { return infer_network_ft(net, x); },
      data.test_x, data.test_y);
}

std::pair<double, double> monte_carlo(const Model& model, const Dataset& data,
                                      double rate, Method method, int trials,
                                      std::uint64_t seed, const SimOptions& opt) {
  require(trials >= 1, "monte_carlo: trials must be >= 1");
  require(rate >= 0.0 && rate <= 1.0, "monte_carlo: rate out of [0,1]");
  const PreparedModel prep = prepare_model(model, opt, method);

  // Reduced in trial-index order; each trial owns stream hash2(seed, t).
  double mean = 0.0, m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double acc = trial_accuracy(prep, data, rate, seed, t);
    const double delta = acc - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (acc - mean);
  }
  const double variance = trials > 1 ? m2 / static_cast<double>(trials - 1) : 0.0;
  return {mean, variance};
}

void validate(const SweepConfig& cfg) {
  require(!cfg.rates.empty(), "sweep: no rates");
  for (double r : cfg.rates)
    require(r >= 0.0 && r <= 1.0, "sweep: rate out of [0,1]");
  require(cfg.trials >= 1, "sweep: trials must be >= 1");
  require(!cfg.methods.empty(), "sweep: no methods");
}

std::vector<SweepRow> run_sweep_rows(const Model& model, const Dataset& data,
                                     const SweepConfig& cfg) {
  validate(cfg);
  std::vector<SweepRow> rows;
  for (double rate : cfg.rates) {
    for (Method method : cfg.methods) {
      auto [mean, var] = monte_carlo(model, data, rate, method, cfg.trials,
                                     cfg.seed, cfg.opt);
      rows.push_back({rate, method, mean, var, cfg.trials, cfg.seed});
    }
  }
  return rows;
}

namespace {

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Largest grid rate whose mean accuracy stays within `drop` points of the
// fault-free accuracy; 0 when even the smallest rate fails.
double tolerated_rate(const std::vector<SweepRow>& rows, Method method,
                      double fault_free, double drop) {
  double best = 0.0;
  for (const SweepRow& r : rows)
    if (r.method == method && r.acc_mean >= fault_free - drop)
      best = std::max(best, r.rate);
  return best;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows,
                      std::optional<double> fault_free_accuracy) {
  std::ostringstream out;
  out << "rate,method,acc_mean,acc_var,trials,seed\n";
  for (const SweepRow& r : rows)
    out << fixed6(r.rate) << ',' << method_name(r.method) << ','
        << fixed6(r.acc_mean) << ',' << fixed6(r.acc_var) << ',' << r.trials << ','
        << r.seed << '\n';

  const bool has_plain = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.method == Method::no_voting;
  });
  const bool has_voting = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.method == Method::voting;
  });
  if (fault_free_accuracy && has_plain && has_voting) {
    constexpr double kDrop = 10.0;  // accuracy-drop budget in points
    const double base = tolerated_rate(rows, Method::no_voting, *fault_free_accuracy, kDrop);
    const double vote = tolerated_rate(rows, Method::voting, *fault_free_accuracy, kDrop);
    out << "# fault_free_accuracy = " << fixed6(*fault_free_accuracy) << '\n';
    out << "# tolerated_rate_no_voting = " << fixed6(base) << '\n';
    out << "# tolerated_rate_voting = " << fixed6(vote) << '\n';
    out << "# tolerated_rate_ratio = ";
    if (base > 0.0)
      out << fixed6(vote / base) << '\n';
    else
      out << (vote > 0.0 ? "inf" : "nan") << '\n';
  }
  return out.str();
}

std::string run_sweep(const Model& model, const Dataset& data,
                      const SweepConfig& cfg) {
  validate(cfg);
  const std::vector<SweepRow> rows = run_sweep_rows(model, data, cfg);
  // Fault-free reference: the plain quantized network (flip identity makes
  // the policy irrelevant at rate 0).
  auto [fault_free, unused] =
      monte_carlo(model, data, 0.0, Method::no_voting, 1, cfg.seed, cfg.opt);
  (void)unused;
  return sweep_csv(rows, fault_free);
}

}  // namespace xbarft
