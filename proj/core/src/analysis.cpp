#include "valab/analysis.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "valab/format.hpp"

namespace valab {
namespace {

template <class Tag>
double l2_distance(const StateActionTable<Tag>& lhs, const StateActionTable<Tag>& rhs) {
  if (lhs.num_states() != rhs.num_states() || lhs.num_actions() != rhs.num_actions())
    throw ParameterError("l2 error: shape mismatch");
  return (lhs.matrix() - rhs.matrix()).norm();
}

constexpr std::array<std::string_view, 5> kRegistry = {metric::kPerformance, metric::kAdvError, metric::kQError,
                                                       metric::kAdvNormNu, metric::kAdvNormMu};

}  // namespace

double adv_error(const AdvTable& a_hat, const AdvTable& a_ref) { return l2_distance(a_hat, a_ref); }

double q_error(const QTable& q_hat, const QTable& q_ref) { return l2_distance(q_hat, q_ref); }

AdvTable advantage_of(const QTable& q, const PolicyTable& pi) {
  return AdvTable(Matrix(q.matrix().colwise() - pi.average(q)));
}

double value_gradient_gap(const TabularMdp& mdp, const VaLearnerState& params, const PolicyTable& mu,
                    const BackupMode& mode, int x) {
  if (!params.targets_match_online())
    throw ParameterError("value_gradient_gap: target tables must equal the online tables");
  if (x < 0 || x >= mdp.num_states()) throw ParameterError("value_gradient_gap: state out of range");
  if (mu.num_states() != mdp.num_states() || mu.num_actions() != mdp.num_actions())
    throw ParameterError("value_gradient_gap: mu shape does not match the MDP");

  DuelingLearnerState dueling;
  dueling.v = params.v;
  dueling.v_target = params.v_target;
  dueling.f = QTable(params.adv.matrix());
  dueling.f_target = QTable(params.adv_target.matrix());
  dueling.nu = mu;

  LearnSpec spec;
  spec.mode = mode;
  spec.gamma = mdp.gamma();
  spec.n_step = 1;

  const int num_states = mdp.num_states();
  const int num_actions = mdp.num_actions();
  VaGradient va_grad{Vector::Zero(num_states), Matrix::Zero(num_states, num_actions)};
  DuelingGradient dueling_grad{Vector::Zero(num_states), Matrix::Zero(num_states, num_actions)};
  for (int a = 0; a < num_actions; ++a) {
    if (mu(x, a) == 0.0) continue;
    for (int next = 0; next < num_states; ++next) {
      const double weight = mu(x, a) * mdp.transition(x, a, next);
      if (weight == 0.0) continue;
      const Transition t{x, a, mdp.reward(x, a), next};
      accumulate_gradient(params, Segment(&t, 1), mu, spec, weight, va_grad);
      accumulate_gradient(dueling, Segment(&t, 1), spec, weight, dueling_grad);
    }
  }
  return (va_grad.v - dueling_grad.v).cwiseAbs().maxCoeff();
}

double advantage_norm_objective(const QTable& f, const PolicyTable& nu, const PolicyTable& mu, int x) {
  const double offset = nu.average(f, x);
  double total = 0.0;
  for (int a = 0; a < f.num_actions(); ++a) {
    const double d = f(x, a) - offset;
    total += mu(x, a) * d * d;
  }
  return total;
}

double sample_advantage_norm(const QTable& f, const PolicyTable& weights, std::span<const Transition> samples) {
  if (samples.empty()) return 0.0;
  const Vector offsets = weights.average(f);
  double total = 0.0;
  for (const auto& t : samples) {
    const double d = f(t.x, t.a) - offsets(t.x);
    total += d * d;
  }
  return total / static_cast<double>(samples.size());
}

RateCertificate rate_certificate(std::span<const double> series, double gamma, std::optional<double> constant) {
  if (series.empty()) throw ParameterError("rate_certificate: empty series");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("rate_certificate: gamma must lie in (0, 1)");
  constexpr double kSlack = 1e-9;

  double fitted = 0.0;
  double power = 1.0;
  for (double error : series) {
    fitted = std::max(fitted, error / power);
    power *= gamma;
  }
  const double c = constant.value_or(fitted);

  RateCertificate out;
  out.fitted_constant = fitted;
  out.margin = std::numeric_limits<double>::infinity();
  power = 1.0;
  for (double error : series) {
    out.margin = std::min(out.margin, c * power + kSlack - error);
    power *= gamma;
  }
  out.certified = out.margin >= 0.0;
  return out;
}

std::span<const std::string_view> metric_registry() { return kRegistry; }

bool is_registered_metric(std::string_view name) {
  for (auto known : kRegistry)
    if (known == name) return true;
  return false;
}

std::string to_csv(std::span<const MetricRecord> records) {
  std::string out(kMetricCsvHeader);
  out += '\n';
  for (const auto& record : records) {
    if (!is_registered_metric(record.metric))
      throw ParameterError("unregistered metric '" + record.metric + "'");
    out += record.run_id;
    out += ',' + std::to_string(record.seed) + ',' + record.algorithm + ',' + std::to_string(record.iteration) + ',' +
           record.metric + ',' + format_double(record.value) + '\n';
  }
  return out;
}

void write_metric_csv(const std::filesystem::path& path, std::span<const MetricRecord> records) {
  const std::string text = to_csv(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MetricRecord> read_metric_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricCsvHeader)
    throw IoError(path.string() + ": missing metric CSV header");
  std::vector<MetricRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::array<std::string, 6> cells;
    for (auto& cell : cells)
      if (!std::getline(fields, cell, ',')) throw IoError(path.string() + ": malformed row '" + line + "'");
    MetricRecord record;
    record.run_id = cells[0];
    record.seed = std::stoull(cells[1]);
    record.algorithm = cells[2];
    record.iteration = std::stoll(cells[3]);
    record.metric = cells[4];
    record.value = std::strtod(cells[5].c_str(), nullptr);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace valab
