#include "hpo/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace hpo {

namespace {

ordered_json vector_to_json(const VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json matrix_to_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorXd vector_from_json(const ordered_json& arr) {
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

MatrixXd matrix_from_json(const ordered_json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r > 0 ? rows[0].size() : 0;
  MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

ordered_json instance_to_json(const BanditInstance& inst) {
  ordered_json j;
  j["schema"] = 1;
  j["context_dim"] = inst.context_dim;
  j["num_responses"] = inst.num_responses;
  j["feat_dim"] = inst.feat_dim();
  j["seed"] = inst.seed;
  j["scale"] = inst.fmap.scale;
  j["r_max"] = inst.r_max;
  j["r_max_analytic"] = inst.r_max_analytic;
  j["theta_star"] = vector_to_json(inst.theta_star);
  j["bias"] = vector_to_json(inst.fmap.bias);
  j["weights"] = matrix_to_json(inst.fmap.weights);
  return j;
}

BanditInstance instance_from_json(const ordered_json& j) {
  BanditInstance inst;
  inst.context_dim = j.at("context_dim").get<int>();
  inst.num_responses = j.at("num_responses").get<int>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.r_max = j.at("r_max").get<double>();
  inst.r_max_analytic = j.at("r_max_analytic").get<double>();
  inst.theta_star = vector_from_json(j.at("theta_star"));
  inst.fmap.context_dim = inst.context_dim;
  inst.fmap.num_responses = inst.num_responses;
  inst.fmap.feat_dim = j.at("feat_dim").get<int>();
  inst.fmap.scale = j.at("scale").get<double>();
  inst.fmap.bias = vector_from_json(j.at("bias"));
  inst.fmap.weights = matrix_from_json(j.at("weights"));
  if (inst.fmap.weights.rows() != inst.fmap.feat_dim ||
      inst.fmap.weights.cols() != inst.fmap.input_dim()) {
    throw std::runtime_error("instance_from_json: weight shape mismatch");
  }
  return inst;
}

void save_instance(const BanditInstance& inst, const std::string& path) {
  open_out(path) << instance_to_json(inst).dump() << '\n';
}

BanditInstance load_instance(const std::string& path) {
  ordered_json j;
  open_in(path) >> j;
  return instance_from_json(j);
}

void save_dataset(const OfflineDataset& data, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const PreferenceRecord& rec : data) {
    ordered_json j;
    j["x"] = vector_to_json(rec.x);
    j["y_plus"] = rec.y_plus;
    j["y_minus"] = rec.y_minus;
    j["source"] = rec.source == Source::offline ? "offline" : "online";
    out << j.dump() << '\n';
  }
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in = open_in(path);
  OfflineDataset data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const ordered_json j = ordered_json::parse(line);
    PreferenceRecord rec;
    rec.x = vector_from_json(j.at("x"));
    rec.y_plus = j.at("y_plus").get<int>();
    rec.y_minus = j.at("y_minus").get<int>();
    rec.source = j.at("source").get<std::string>() == "online" ? Source::online
                                                               : Source::offline;
    data.push_back(std::move(rec));
  }
  return data;
}

void save_policy(const LogLinearPolicy& policy, const std::string& path) {
  ordered_json j;
  j["theta"] = vector_to_json(policy.theta);
  j["d"] = static_cast<int>(policy.theta.size());
  open_out(path) << j.dump() << '\n';
}

LogLinearPolicy load_policy(const std::string& path) {
  ordered_json j;
  open_in(path) >> j;
  LogLinearPolicy p{vector_from_json(j.at("theta"))};
  if (static_cast<int>(p.theta.size()) != j.at("d").get<int>()) {
    throw std::runtime_error("load_policy: dimension mismatch");
  }
  return p;
}

ordered_json coverage_to_json(const CoverageReport& rep) {
  ordered_json j;
  j["schema"] = 1;
  j["t_rounds"] = rep.t_rounds;
  j["gamma"] = rep.gamma;
  j["v_max"] = rep.v_max;
  j["threshold_c"] = rep.threshold_c;
  j["d_hyb"] = rep.d_hyb;
  j["c_star_infinite"] = rep.c_star_infinite;
  if (rep.c_star_infinite) {
    j["c_star"] = nullptr;
  } else {
    j["c_star"] = rep.c_star;
  }
  j["sec_bound_linear"] = rep.sec_bound;
  j["theorem1_bound"] = rep.theorem1_bound;
  j["eigenvalues"] = vector_to_json(rep.eigenvalues);
  j["lambda_off"] = matrix_to_json(rep.lambda_off);
  j["lambda_tilde"] = matrix_to_json(rep.lambda_tilde);
  return j;
}

}  // namespace hpo
