#include "fastwbc/trainer/serialize.hpp"

#include "fastwbc/error.hpp"

#include <cmath>

namespace fastwbc::trainer::io {

namespace {

json vec2(const env::Vec2& v) { return json::array({v(0), v(1)}); }

// Infinite values (e.g. a disabled push schedule) are written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const numcore::MlpNet& net) {
  json layers = json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    layers.push_back({{"W", to_json(net.weights[l])}, {"b", to_json(net.biases[l])}});
  }
  return {{"layers", std::move(layers)}};
}

json to_json(const policy::MoeNet& net) {
  json experts = json::array();
  for (const auto& e : net.experts) experts.push_back(to_json(e));
  return {{"experts", std::move(experts)}, {"gating", to_json(net.gating)}};
}

json to_json(const RunningNorm& n) {
  return {{"mean", to_json(n.mean)}, {"var", to_json(n.var)}, {"count", n.count}};
}

json to_json(const env::PtbModel& m) {
  return {{"l1", m.l1},
          {"l2", m.l2},
          {"m1", m.m1},
          {"m2", m.m2},
          {"foot_half", m.foot_half},
          {"tau_max", vec2(m.tau_max)},
          {"kp", vec2(m.kp)},
          {"kd", vec2(m.kd)},
          {"q_default", vec2(m.q_default)},
          {"g", m.g},
          {"joint_lower", vec2(m.joint_lower)},
          {"joint_upper", vec2(m.joint_upper)},
          {"com_offset_x", m.com_offset_x}};
}

json to_json(const env::EnvSnapshot& s) {
  const env::EnvState& st = s.state;
  return {{"model", to_json(s.model)},
          {"state",
           {{"q", vec2(st.q)},
            {"qd", vec2(st.qd)},
            {"foot_x", st.foot_x},
            {"foot_xd", st.foot_xd},
            {"tipped", st.tipped},
            {"tip_substeps", st.tip_substeps},
            {"t", st.t},
            {"last_action", vec2(st.last_action)},
            {"prev_action", vec2(st.prev_action)},
            {"frame_idx", st.frame_idx},
            {"cop_x", st.cop_x},
            {"normal_force", st.normal_force}}},
          {"rng_state", s.rng_state},
          {"next_push", finite_or_null(s.next_push)}};
}

json to_json(const SamplerState& s) {
  json segs = json::array();
  for (const auto& clip : s.segments) {
    json c = json::array();
    for (const auto& [a, b] : clip) c.push_back({a, b});
    segs.push_back(std::move(c));
  }
  return {{"floor", s.floor},     {"segments", std::move(segs)}, {"attempts", s.attempts},
          {"failures", s.failures}, {"p_seg", s.p_seg},           {"p_motion", s.p_motion}};
}

json to_json(const numcore::Adam& a) {
  json m = json::array(), v = json::array();
  for (const auto& x : a.first_moments()) m.push_back(to_json(x));
  for (const auto& x : a.second_moments()) v.push_back(to_json(x));
  return {{"steps", a.steps()}, {"m", std::move(m)}, {"v", std::move(v)}};
}

void Reader::fail(const std::string& what) const {
  throw ValidationError("field " + path_ + ": " + what);
}

const json& Reader::field(const json& obj, const std::string& key) const {
  if (!obj.is_object()) fail("expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) at(key).fail("missing");
  return *it;
}

double Reader::number(const json& j) const {
  if (!j.is_number()) fail("expected a number");
  return j.get<double>();
}

std::uint64_t Reader::u64(const json& j) const {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail("expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

long Reader::integer(const json& j) const {
  if (!j.is_number_integer()) fail("expected an integer");
  return j.get<long>();
}

bool Reader::boolean(const json& j) const {
  if (!j.is_boolean()) fail("expected a boolean");
  return j.get<bool>();
}

std::string Reader::string(const json& j) const {
  if (!j.is_string()) fail("expected a string");
  return j.get<std::string>();
}

const json& Reader::array(const json& j) const {
  if (!j.is_array()) fail("expected an array");
  return j;
}

Matrix Reader::matrix(const json& j) const {
  const long rows = at("rows").integer(field(j, "rows"));
  const long cols = at("cols").integer(field(j, "cols"));
  const Reader rd = at("data");
  const json& data = rd.array(field(j, "data"));
  if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows) rd.fail("row count mismatch");
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const Reader rr = rd.at(static_cast<std::size_t>(r));
    const json& row = rr.array(data[static_cast<std::size_t>(r)]);
    if (static_cast<long>(row.size()) != cols) rr.fail("column count mismatch");
    for (long c = 0; c < cols; ++c) m(r, c) = rr.at(static_cast<std::size_t>(c)).number(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

Vector Reader::vector(const json& j) const {
  const json& a = array(j);
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = at(i).number(a[i]);
  return v;
}

numcore::MlpNet Reader::mlp(const json& j) const {
  const Reader rl = at("layers");
  const json& layers = rl.array(field(j, "layers"));
  numcore::MlpNet net;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Reader r = rl.at(l);
    net.weights.push_back(r.at("W").matrix(r.field(layers[l], "W")));
    net.biases.push_back(r.at("b").vector(r.field(layers[l], "b")));
    if (net.biases.back().size() != net.weights.back().rows()) r.fail("bias size mismatch");
    if (l > 0 && net.weights[l].cols() != net.weights[l - 1].rows()) r.fail("layer dimensions do not chain");
  }
  if (net.weights.empty()) rl.fail("no layers");
  return net;
}

policy::MoeNet Reader::moe(const json& j) const {
  policy::MoeNet net;
  const Reader re = at("experts");
  const json& experts = re.array(field(j, "experts"));
  for (std::size_t e = 0; e < experts.size(); ++e) net.experts.push_back(re.at(e).mlp(experts[e]));
  if (net.experts.empty()) re.fail("no experts");
  net.gating = at("gating").mlp(field(j, "gating"));
  for (const auto& e : net.experts) {
    if (e.input_dim() != net.gating.input_dim() || e.output_dim() != net.experts[0].output_dim()) {
      re.fail("expert shapes differ");
    }
  }
  if (net.gating.output_dim() != net.experts.size()) at("gating").fail("output size != expert count");
  return net;
}

RunningNorm Reader::norm(const json& j) const {
  RunningNorm n;
  n.mean = at("mean").vector(field(j, "mean"));
  n.var = at("var").vector(field(j, "var"));
  n.count = at("count").number(field(j, "count"));
  if (n.mean.size() != n.var.size()) fail("mean/var size mismatch");
  return n;
}

namespace {
env::Vec2 read_vec2(const Reader& r, const json& j) {
  const Vector v = r.vector(j);
  if (v.size() != 2) r.fail("expected 2 entries");
  return {v(0), v(1)};
}
}  // namespace

env::PtbModel Reader::model(const json& j) const {
  env::PtbModel m;
  auto num = [&](const char* k) { return at(k).number(field(j, k)); };
  auto v2 = [&](const char* k) { return read_vec2(at(k), field(j, k)); };
  m.l1 = num("l1");
  m.l2 = num("l2");
  m.m1 = num("m1");
  m.m2 = num("m2");
  m.foot_half = num("foot_half");
  m.tau_max = v2("tau_max");
  m.kp = v2("kp");
  m.kd = v2("kd");
  m.q_default = v2("q_default");
  m.g = num("g");
  m.joint_lower = v2("joint_lower");
  m.joint_upper = v2("joint_upper");
  m.com_offset_x = num("com_offset_x");
  return m;
}

env::EnvSnapshot Reader::env_snapshot(const json& j) const {
  env::EnvSnapshot s;
  s.model = at("model").model(field(j, "model"));
  const Reader rs = at("state");
  const json& st = field(j, "state");
  auto num = [&](const char* k) { return rs.at(k).number(rs.field(st, k)); };
  auto v2 = [&](const char* k) { return read_vec2(rs.at(k), rs.field(st, k)); };
  s.state.q = v2("q");
  s.state.qd = v2("qd");
  s.state.foot_x = num("foot_x");
  s.state.foot_xd = num("foot_xd");
  s.state.tipped = rs.at("tipped").boolean(rs.field(st, "tipped"));
  s.state.tip_substeps = static_cast<int>(rs.at("tip_substeps").integer(rs.field(st, "tip_substeps")));
  s.state.t = num("t");
  s.state.last_action = v2("last_action");
  s.state.prev_action = v2("prev_action");
  s.state.frame_idx = static_cast<std::size_t>(rs.at("frame_idx").u64(rs.field(st, "frame_idx")));
  s.state.cop_x = num("cop_x");
  s.state.normal_force = num("normal_force");
  s.rng_state = at("rng_state").u64(field(j, "rng_state"));
  const json& np = field(j, "next_push");
  s.next_push = np.is_null() ? HUGE_VAL : at("next_push").number(np);
  return s;
}

SamplerState Reader::sampler(const json& j) const {
  SamplerState s;
  s.floor = at("floor").number(field(j, "floor"));
  const Reader rs = at("segments");
  const json& segs = rs.array(field(j, "segments"));
  for (std::size_t m = 0; m < segs.size(); ++m) {
    const json& c = rs.at(m).array(segs[m]);
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Reader ri = rs.at(m).at(i);
      const json& p = ri.array(c[i]);
      if (p.size() != 2) ri.fail("expected [start, end]");
      v.emplace_back(ri.at(std::size_t{0}).u64(p[0]), ri.at(std::size_t{1}).u64(p[1]));
    }
    s.segments.push_back(std::move(v));
  }
  auto table = [&](const char* key) {
    const Reader rt = at(key);
    const json& t = rt.array(field(j, key));
    if (t.size() != s.segments.size()) rt.fail("clip count mismatch");
    std::vector<std::vector<double>> out;
    for (std::size_t m = 0; m < t.size(); ++m) {
      const Vector v = rt.at(m).vector(t[m]);
      if (static_cast<std::size_t>(v.size()) != s.segments[m].size()) rt.at(m).fail("segment count mismatch");
      out.emplace_back(v.data(), v.data() + v.size());
    }
    return out;
  };
  s.attempts = table("attempts");
  s.failures = table("failures");
  s.p_seg = table("p_seg");
  const Vector pm = at("p_motion").vector(field(j, "p_motion"));
  if (static_cast<std::size_t>(pm.size()) != s.segments.size()) at("p_motion").fail("clip count mismatch");
  s.p_motion.assign(pm.data(), pm.data() + pm.size());
  return s;
}

void Reader::adam(const json& j, numcore::Adam& out) const {
  const long steps = at("steps").integer(field(j, "steps"));
  std::vector<Vector> m, v;
  const Reader rm = at("m"), rv = at("v");
  const json& jm = rm.array(field(j, "m"));
  const json& jv = rv.array(field(j, "v"));
  if (jm.size() != jv.size()) fail("moment count mismatch");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    m.push_back(rm.at(i).vector(jm[i]));
    v.push_back(rv.at(i).vector(jv[i]));
  }
  out.restore(steps, std::move(m), std::move(v));
}

}  // namespace fastwbc::trainer::io
