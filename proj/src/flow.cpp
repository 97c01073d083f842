#include "wgs/flow.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace wgs {

namespace {

// Soft clamp applied to the raw scale-net output.
inline Matrix clamp_s(const Matrix& s_raw, double cap) {
  return cap * (s_raw.array() / cap).tanh();
}

}  // namespace

FlowModel FlowModel::create(int dim, int n_layers, int hidden_width, RandomStream& rng,
                            double base_std) {
  if (dim < 2) throw std::invalid_argument("FlowModel: dim must be >= 2");
  if (n_layers < 1) throw std::invalid_argument("FlowModel: need at least one layer");
  FlowModel flow;
  flow.dim = dim;
  flow.base_std = base_std;

  std::vector<int> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  const int a = dim / 2;  // conditioning block size for even layers
  for (int l = 0; l < n_layers; ++l) {
    if (l % 2 == 0) {  // fresh permutation for each layer pair
      for (int i = dim - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_index(i + 1));
        std::swap(perm[i], perm[j]);
      }
    }
    CouplingLayer layer;
    const bool first_half_active = (l % 2 == 0);
    for (int i = 0; i < dim; ++i) {
      const bool in_first = i < a;
      if (in_first == first_half_active)
        layer.active.push_back(perm[i]);
      else
        layer.cond.push_back(perm[i]);
    }
    const int n_active = static_cast<int>(layer.active.size());
    const int n_cond = static_cast<int>(layer.cond.size());
    const std::vector<int> dims = {n_cond, hidden_width, hidden_width, hidden_width,
                                   n_active};
    layer.t_net = Mlp::create(dims, rng);
    layer.s_net = Mlp::create(dims, rng, /*zero_last=*/true);
    flow.layers.push_back(std::move(layer));
  }
  return flow;
}

Matrix FlowModel::forward(const Matrix& z) const {
  if (z.cols() != dim) throw std::invalid_argument("FlowModel::forward: dim mismatch");
  Matrix x = z;
  Matrix cond, act;
  for (const CouplingLayer& layer : layers) {
    cond.resize(x.rows(), static_cast<Eigen::Index>(layer.cond.size()));
    for (std::size_t j = 0; j < layer.cond.size(); ++j)
      cond.col(j) = x.col(layer.cond[j]);
    const Matrix t = layer.t_net.forward(cond);
    const Matrix s = clamp_s(layer.s_net.forward(cond), s_cap);
    act.resize(x.rows(), static_cast<Eigen::Index>(layer.active.size()));
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      act.col(j) = x.col(layer.active[j]);
    act = ((act - t).array() * (-s.array()).exp()).matrix();
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      x.col(layer.active[j]) = act.col(j);
  }
  return x;
}

Vector FlowModel::forward(const Vector& z) const {
  return forward(Matrix(z.transpose())).row(0).transpose();
}

Matrix FlowModel::inverse(const Matrix& x) const {
  if (x.cols() != dim) throw std::invalid_argument("FlowModel::inverse: dim mismatch");
  Matrix z = x;
  Matrix cond, act;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const CouplingLayer& layer = *it;
    cond.resize(z.rows(), static_cast<Eigen::Index>(layer.cond.size()));
    for (std::size_t j = 0; j < layer.cond.size(); ++j)
      cond.col(j) = z.col(layer.cond[j]);
    const Matrix t = layer.t_net.forward(cond);
    const Matrix s = clamp_s(layer.s_net.forward(cond), s_cap);
    act.resize(z.rows(), static_cast<Eigen::Index>(layer.active.size()));
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      act.col(j) = z.col(layer.active[j]);
    act = (act.array() * s.array().exp() + t.array()).matrix();
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      z.col(layer.active[j]) = act.col(j);
  }
  return z;
}

Vector FlowModel::inverse(const Vector& x) const {
  return inverse(Matrix(x.transpose())).row(0).transpose();
}

Vector FlowModel::log_density(const Matrix& x) const {
  // Inverse pass, accumulating sum_s = sum over layers of s(cond) on the
  // active block; |det grad G^{-1}| = exp(+sum_s).
  Matrix z = x;
  Vector sum_s = Vector::Zero(x.rows());
  Matrix cond, act;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const CouplingLayer& layer = *it;
    cond.resize(z.rows(), static_cast<Eigen::Index>(layer.cond.size()));
    for (std::size_t j = 0; j < layer.cond.size(); ++j)
      cond.col(j) = z.col(layer.cond[j]);
    const Matrix t = layer.t_net.forward(cond);
    const Matrix s = clamp_s(layer.s_net.forward(cond), s_cap);
    sum_s += s.rowwise().sum();
    act.resize(z.rows(), static_cast<Eigen::Index>(layer.active.size()));
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      act.col(j) = z.col(layer.active[j]);
    act = (act.array() * s.array().exp() + t.array()).matrix();
    for (std::size_t j = 0; j < layer.active.size(); ++j)
      z.col(layer.active[j]) = act.col(j);
  }
  const double log_norm =
      -0.5 * dim * std::log(2.0 * M_PI) - dim * std::log(base_std);
  return (log_norm - z.rowwise().squaredNorm().array() / (2.0 * base_std * base_std) +
          sum_s.array())
      .matrix();
}

double FlowModel::log_density(const Vector& x) const {
  return log_density(Matrix(x.transpose()))(0);
}

std::pair<Matrix, Matrix> FlowModel::sample_batch(int n, RandomStream& rng) const {
  if (n < 1) throw std::invalid_argument("sample_batch: n must be >= 1");
  Matrix z = base_std * rng.normal_matrix(n, dim);
  Matrix x = forward(z);
  return {std::move(z), std::move(x)};
}

Tape::Id FlowModel::forward_tape(Tape& tape, Tape::Id z) {
  Tape::Id x = z;
  for (CouplingLayer& layer : layers) {
    const Tape::Id cond = tape.gather_cols(x, layer.cond);
    const Tape::Id act = tape.gather_cols(x, layer.active);
    const Tape::Id t = layer.t_net.forward_tape(tape, cond);
    const Tape::Id s = tape.tanh_scale(layer.s_net.forward_tape(tape, cond), s_cap);
    const Tape::Id out = tape.coupling_combine(act, t, s);
    x = tape.combine_cols(out, layer.active, cond, layer.cond, dim);
  }
  return x;
}

std::size_t FlowModel::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.t_net.param_count() + layer.s_net.param_count();
  return n;
}

void FlowModel::collect_params(std::vector<Param*>& out) {
  for (auto& layer : layers) {
    layer.t_net.collect_params(out);
    layer.s_net.collect_params(out);
  }
}

// ---- checkpoint i/o ----

namespace {

using nlohmann::json;

json mlp_to_json(const Mlp& net) {
  json j;
  j["dims"] = net.layer_dims;
  j["act_slope"] = net.act_slope;
  json weights = json::array(), biases = json::array();
  for (const auto& layer : net.layers) {
    std::vector<double> w(layer.W.value.data(), layer.W.value.data() + layer.W.size());
    std::vector<double> b(layer.b.value.data(), layer.b.value.data() + layer.b.size());
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp mlp_from_json(const json& j) {
  Mlp net;
  net.layer_dims = j.at("dims").get<std::vector<int>>();
  net.act_slope = j.at("act_slope").get<double>();
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
    const int fan_in = net.layer_dims[l], fan_out = net.layer_dims[l + 1];
    const auto w = weights.at(l).get<std::vector<double>>();
    const auto b = biases.at(l).get<std::vector<double>>();
    if (static_cast<int>(w.size()) != fan_in * fan_out ||
        static_cast<int>(b.size()) != fan_out)
      throw std::runtime_error("checkpoint: parameter array size mismatch");
    Matrix W = Eigen::Map<const Matrix>(w.data(), fan_out, fan_in);
    Matrix B = Eigen::Map<const Matrix>(b.data(), fan_out, 1);
    net.layers.push_back({Param(std::move(W)), Param(std::move(B))});
  }
  return net;
}

}  // namespace

void save_checkpoint(const FlowModel& flow, const std::string& path,
                     std::uint64_t seed, const std::string& config_hash) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "realnvp_flow";
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["dim"] = flow.dim;
  j["base_std"] = flow.base_std;
  j["s_cap"] = flow.s_cap;
  json layers = json::array();
  for (const auto& layer : flow.layers) {
    json jl;
    jl["active"] = layer.active;
    jl["cond"] = layer.cond;
    jl["t_net"] = mlp_to_json(layer.t_net);
    jl["s_net"] = mlp_to_json(layer.s_net);
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << j.dump(1);
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

FlowModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json j;
  in >> j;
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("load_checkpoint: unsupported format version");
  FlowModel flow;
  flow.dim = j.at("dim").get<int>();
  flow.base_std = j.at("base_std").get<double>();
  flow.s_cap = j.at("s_cap").get<double>();
  for (const auto& jl : j.at("layers")) {
    CouplingLayer layer;
    layer.active = jl.at("active").get<std::vector<int>>();
    layer.cond = jl.at("cond").get<std::vector<int>>();
    layer.t_net = mlp_from_json(jl.at("t_net"));
    layer.s_net = mlp_from_json(jl.at("s_net"));
    flow.layers.push_back(std::move(layer));
  }
  return flow;
}

}  // namespace wgs
