#include "mlpcm/serialize.hpp"

#include <fstream>

namespace mlpcm {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) fail(Errc::config_error, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::config_error, std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) fail(Errc::config_error, "complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (const auto& z : m.entries()) entries.push_back(to_json(z));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

ComplexMatrix matrix_from_json(const Json& j) {
  const auto rows = field<std::size_t>(j, "rows");
  const auto cols = field<std::size_t>(j, "cols");
  const auto& e = j.at("entries");
  if (e.size() != rows * cols) fail(Errc::config_error, "matrix: entries length must be rows * cols");
  std::vector<cplx> v;
  v.reserve(e.size());
  for (const auto& z : e) v.push_back(complex_from_json(z));
  return ComplexMatrix(rows, cols, std::move(v));
}

Json to_json(const StbcSpec& spec) {
  Json coeffs = Json::array();
  for (const auto& c : spec.coeffs) coeffs.push_back(to_json(c));
  return {{"family", to_string(spec.family)},
          {"coeffs", coeffs},
          {"l", spec.l},
          {"nt", spec.nt},
          {"n_syms", spec.n_syms},
          {"constellation", to_string(spec.constellation.kind)},
          {"tv", spec.tv},
          {"norm", spec.norm}};
}

StbcSpec spec_from_json(const Json& j) {
  const auto family = family_from_string(field<std::string>(j, "family"));
  std::vector<cplx> coeffs;
  if (j.contains("coeffs"))
    for (const auto& c : j.at("coeffs")) coeffs.push_back(complex_from_json(c));
  const auto kind = constellation_kind_from_string(field<std::string>(j, "constellation"));
  const std::size_t nt = j.value("nt", std::size_t{2});
  auto spec = build_stbc(family, std::move(coeffs), make_constellation(kind), j.value("tv", false), nt);
  if (j.contains("norm")) spec.norm = j.at("norm").get<double>();
  return spec;
}

Json to_json(const Codebook& cb) {
  Json symbols = Json::array();
  for (std::size_t i = 0; i < cb.size(); ++i) symbols.push_back({{"label", i}, {"matrix", to_json(cb.symbols[i])}});
  return {{"spec", to_json(cb.spec)}, {"symbols", symbols}};
}

Codebook codebook_from_json(const Json& j) {
  Codebook cb;
  cb.spec = spec_from_json(j.at("spec"));
  const auto& symbols = j.at("symbols");
  cb.symbols.resize(symbols.size());
  for (const auto& s : symbols) {
    const auto label = field<std::size_t>(s, "label");
    if (label >= cb.symbols.size()) fail(Errc::config_error, "codebook: label out of range");
    cb.symbols[label] = matrix_from_json(s.at("matrix"));
  }
  return cb;
}

Json to_json(const SetPartitionMap& spm) {
  return {{"perm", spm.perm}, {"b", spm.b}, {"measure", to_string(spm.measure)}, {"rel_threshold", spm.rel_threshold}};
}

SetPartitionMap spm_from_json(const Json& j) {
  SetPartitionMap spm;
  spm.perm = field<std::vector<std::uint32_t>>(j, "perm");
  spm.b = field<std::size_t>(j, "b");
  spm.measure = measure_from_string(j.value("measure", std::string("frobenius")));
  spm.rel_threshold = j.value("rel_threshold", 0.0);
  if (spm.perm.size() != (std::size_t{1} << spm.b)) fail(Errc::config_error, "labelling: perm must have 2^b entries");
  std::vector<char> seen(spm.perm.size(), 0);
  for (auto p : spm.perm) {
    if (p >= spm.perm.size() || seen[p]) fail(Errc::config_error, "labelling: perm is not a bijection");
    seen[p] = 1;
  }
  return spm;
}

Json to_json(const MlpcmCode& code) {
  return {{"n", code.n},
          {"b", code.b},
          {"info_sets", code.info_sets},
          {"rates", code.rates},
          {"r_tot", code.r_tot},
          {"design_snr", code.design_snr},
          {"ranking_seed", code.ranking_seed},
          {"ranking_trials", code.ranking_trials}};
}

MlpcmCode code_from_json(const Json& j) {
  auto code = make_code(field<std::size_t>(j, "n"), field<std::vector<std::vector<std::uint32_t>>>(j, "info_sets"),
                        j.value("design_snr", 0.0));
  if (j.contains("b") && j.at("b").get<std::size_t>() != code.b) fail(Errc::config_error, "code: b disagrees with info_sets");
  code.ranking_seed = j.value("ranking_seed", std::uint64_t{0});
  code.ranking_trials = j.value("ranking_trials", std::size_t{0});
  return code;
}

Json to_json(const BitChannelRanking& rank) {
  return {{"n", rank.n},         {"b", rank.b},         {"error_counts", rank.error_counts},
          {"trials", rank.trials}, {"snr_db", rank.snr}, {"seed", rank.seed}};
}

BitChannelRanking ranking_from_json(const Json& j) {
  BitChannelRanking r;
  r.n = field<std::size_t>(j, "n");
  r.b = field<std::size_t>(j, "b");
  r.error_counts = field<std::vector<std::uint64_t>>(j, "error_counts");
  r.trials = field<std::size_t>(j, "trials");
  r.snr = j.value("snr_db", 0.0);
  r.seed = j.value("seed", std::uint64_t{0});
  if (r.error_counts.size() != r.n * r.b) fail(Errc::config_error, "ranking: error_counts must have n * b entries");
  return r;
}

Json to_json(const MiSamples& s) {
  return {{"b", s.b},   {"mc", s.mc},         {"seed", s.seed}, {"stream_id", s.stream_id},
          {"values", s.values}, {"total", s.total}};
}

MiSamples mi_samples_from_json(const Json& j) {
  MiSamples s;
  s.b = field<std::size_t>(j, "b");
  s.mc = field<std::size_t>(j, "mc");
  s.seed = field<std::uint64_t>(j, "seed");
  s.stream_id = j.value("stream_id", std::uint64_t{0});
  s.values = field<std::vector<double>>(j, "values");
  s.total = field<std::vector<double>>(j, "total");
  if (s.values.size() != s.total.size() * s.b) fail(Errc::config_error, "mi samples: values must be realizations x b");
  return s;
}

Json to_json(const OmegaMoments& m) {
  return {{"nr", m.nr}, {"e_omega", m.e_omega}, {"e_h2omega", m.e_h2omega}, {"samples", m.samples}, {"seed", m.seed}};
}

OmegaMoments omega_moments_from_json(const Json& j) {
  OmegaMoments m;
  m.nr = field<std::size_t>(j, "nr");
  m.e_omega = field<double>(j, "e_omega");
  m.e_h2omega = field<double>(j, "e_h2omega");
  m.samples = j.value("samples", std::size_t{0});
  m.seed = j.value("seed", std::uint64_t{0});
  return m;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config_error, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::config_error, "'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(Errc::config_error, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace mlpcm
