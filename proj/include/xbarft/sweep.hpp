#ifndef XBARFT_SWEEP_HPP
#define XBARFT_SWEEP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xbarft/dataset.hpp"
#include "xbarft/embed.hpp"
#include "xbarft/ftol.hpp"
#include "xbarft/model.hpp"

namespace xbarft {

enum class Method { no_voting, voting, voting_embedded };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// Simulation knobs shared by every method. no_voting always runs with one
// candidate and no flipping; the voting methods use `candidates` and `flip`.
struct SimOptions {
  QuantConfig quant{8};
  int candidates = 3;
  FlipPolicy flip = FlipPolicy::msb_only;
  double sa1_share = 9.04 / (9.04 + 1.75);
};

// Fault-free per-method preparation, reused across trials.
struct PreparedModel {
  Method method = Method::no_voting;
  SimOptions opt;
  std::vector<CrossbarLayer> mapped;
  std::vector<std::vector<double>> biases;
  std::vector<std::vector<std::size_t>> pruned;
  std::vector<EmbeddedLayer> embedded;  // voting_embedded only
};

PreparedModel prepare_model(const Model& model, const SimOptions& opt, Method method);

FtNetwork realize_ft(const PreparedModel& prep, const FaultModel& fault);
EmbeddedNetwork realize_embedded(const PreparedModel& prep, const FaultModel& fault);

// Test accuracy of one fabricated chip; the fault seed is hash2(seed, trial).
double trial_accuracy(const PreparedModel& prep, const Dataset& data,
                      double rate, std::uint64_t seed, int trial);

// Sample mean and unbiased variance of test accuracy over `trials` chips.
std::pair<double, double> monte_carlo(const Model& model, const Dataset& data,
                                      double rate, Method method, int trials,
                                      std::uint64_t seed, const SimOptions& opt);

struct SweepConfig {
  std::vector<double> rates = {0.0001, 0.00025, 0.0005, 0.00075, 0.001,
                               0.00125, 0.0015, 0.00175, 0.002};
  int trials = 30;
  std::uint64_t seed = 1;
  std::vector<Method> methods = {Method::no_voting, Method::voting};
  SimOptions opt;
};

void validate(const SweepConfig& cfg);

struct SweepRow {
  double rate = 0.0;
  Method method = Method::no_voting;
  double acc_mean = 0.0;
  double acc_var = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

std::vector<SweepRow> run_sweep_rows(const Model& model, const Dataset& data,
                                     const SweepConfig& cfg);

// CSV with header "rate,method,acc_mean,acc_var,trials,seed" and 6-decimal
// fixed-point values. When both no_voting and voting rows are present,
// trailer comment lines report the largest grid rate each method tolerates
// within a 10-point drop from the fault-free accuracy, and their ratio.
std::string sweep_csv(const std::vector<SweepRow>& rows,
                      std::optional<double> fault_free_accuracy);

// Runs the sweep and renders the CSV (fault-free accuracy computed once).
std::string run_sweep(const Model& model, const Dataset& data,
                      const SweepConfig& cfg);

}  // namespace xbarft

#endif
