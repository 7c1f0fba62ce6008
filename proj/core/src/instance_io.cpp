#include "bipen/instance_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace bipen {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "bipen-instance";

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& a) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j));
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

json box_json(const Box& b) { return {{"lo", vec_json(b.lo())}, {"hi", vec_json(b.hi())}}; }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("instance: missing field '") + key + "'");
  return j.at(key);
}

Vec vec_from(const json& j, const char* key, Eigen::Index expect) {
  const json& a = field(j, key);
  if (!a.is_array()) throw SchemaError(std::string("instance: field '") + key + "' is not an array");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw SchemaError(std::string("instance: non-numeric entry in '") + key + "'");
    v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  }
  if (expect >= 0 && v.size() != expect) throw SchemaError(std::string("instance: wrong length of '") + key + "'");
  return v;
}

Mat mat_from(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const json& a = field(j, key);
  const auto r = field(a, "rows").get<Eigen::Index>();
  const auto c = field(a, "cols").get<Eigen::Index>();
  if (r != rows || c != cols) throw SchemaError(std::string("instance: wrong shape of '") + key + "'");
  const Vec flat = vec_from(a, "data", r * c);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = flat(i * c + k);
  }
  return m;
}

Box box_from(const json& j, const char* key, Eigen::Index n) {
  const json& b = field(j, key);
  try {
    return Box(vec_from(b, "lo", n), vec_from(b, "hi", n));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("instance: invalid box '") + key + "': " + e.what());
  }
}

json unc_constants_json(const UncConstants& k) {
  return {{"D_x", k.D_x}, {"D_y", k.D_y}, {"f_low", k.f_low}, {"tf_hi", k.tf_hi}, {"tf_low", k.tf_low}};
}

UncConstants unc_constants_from(const json& j) {
  const json& k = field(j, "constants");
  UncConstants c;
  c.D_x = field(k, "D_x").get<double>();
  c.D_y = field(k, "D_y").get<double>();
  c.f_low = field(k, "f_low").get<double>();
  c.tf_hi = field(k, "tf_hi").get<double>();
  c.tf_low = field(k, "tf_low").get<double>();
  return c;
}

json to_json(const UncLinQuadInstance& in) {
  return {{"format", kFormat},
          {"version", kInstanceVersion},
          {"kind", "unc-linquad"},
          {"n", in.n()},
          {"m", in.m()},
          {"seed", in.seed},
          {"c", vec_json(in.c)},
          {"d", vec_json(in.d)},
          {"d_tilde", vec_json(in.d_tilde)},
          {"y_hat", vec_json(in.y_hat)},
          {"A_tilde", mat_json(in.A_tilde)},
          {"B_tilde", mat_json(in.B_tilde)},
          {"x_box", box_json(in.x_box)},
          {"y_box", box_json(in.y_box)},
          {"constants", unc_constants_json(in.constants)},
          {"L_grad_tf1", in.L_grad_tf1}};
}

json to_json(const ConLinearInstance& in) {
  const ConConstants& k = in.con_constants;
  json cc = {{"L_grad_tg", k.L_grad_tg}, {"L_tg", k.L_tg}, {"tg_hi", k.tg_hi},
             {"L_f", k.L_f},             {"L_tf", k.L_tf}, {"slater_G", nullptr}};
  if (k.slater_G) cc["slater_G"] = *k.slater_G;
  return {{"format", kFormat},
          {"version", kInstanceVersion},
          {"kind", "con-linear"},
          {"n", in.n()},
          {"m", in.m()},
          {"l", in.l()},
          {"seed", in.seed},
          {"c", vec_json(in.c)},
          {"d", vec_json(in.d)},
          {"d_tilde", vec_json(in.d_tilde)},
          {"b_tilde", vec_json(in.b_tilde)},
          {"y_hat", vec_json(in.y_hat)},
          {"lambda_star", vec_json(in.lambda_star)},
          {"A_tilde", mat_json(in.A_tilde)},
          {"B_tilde", mat_json(in.B_tilde)},
          {"x_box", box_json(in.x_box)},
          {"y_box", box_json(in.y_box)},
          {"constants", unc_constants_json(in.constants)},
          {"con_constants", cc}};
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text << '\n';
  if (!f) throw Error("write failed for " + path);
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string(what) + ": corrupt JSON: " + e.what());
  }
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  return std::visit([](const auto& in) { return to_json(in).dump(1); }, inst);
}

Instance instance_from_json(const std::string& text) {
  const json j = parse(text, "instance");
  try {
    if (field(j, "format") != kFormat) throw SchemaError("instance: unknown format tag");
    if (field(j, "version") != kInstanceVersion) throw SchemaError("instance: unsupported version");
    const std::string kind = field(j, "kind").get<std::string>();
    const auto n = field(j, "n").get<Eigen::Index>();
    const auto m = field(j, "m").get<Eigen::Index>();
    if (n < 1 || m < 1) throw SchemaError("instance: nonpositive dimension");
    if (kind == "unc-linquad") {
      UncLinQuadInstance in;
      in.seed = field(j, "seed").get<std::uint64_t>();
      in.c = vec_from(j, "c", n);
      in.d = vec_from(j, "d", m);
      in.d_tilde = vec_from(j, "d_tilde", m);
      in.y_hat = vec_from(j, "y_hat", m);
      in.A_tilde = mat_from(j, "A_tilde", n, m);
      in.B_tilde = mat_from(j, "B_tilde", m, m);
      in.x_box = box_from(j, "x_box", n);
      in.y_box = box_from(j, "y_box", m);
      in.constants = unc_constants_from(j);
      in.L_grad_tf1 = field(j, "L_grad_tf1").get<double>();
      return in;
    }
    if (kind == "con-linear") {
      const auto l = field(j, "l").get<Eigen::Index>();
      if (l < 1) throw SchemaError("instance: nonpositive dimension");
      ConLinearInstance in;
      in.seed = field(j, "seed").get<std::uint64_t>();
      in.c = vec_from(j, "c", n);
      in.d = vec_from(j, "d", m);
      in.d_tilde = vec_from(j, "d_tilde", m);
      in.b_tilde = vec_from(j, "b_tilde", l);
      in.y_hat = vec_from(j, "y_hat", m);
      in.lambda_star = vec_from(j, "lambda_star", l);
      in.A_tilde = mat_from(j, "A_tilde", l, n);
      in.B_tilde = mat_from(j, "B_tilde", l, m);
      in.x_box = box_from(j, "x_box", n);
      in.y_box = box_from(j, "y_box", m);
      in.constants = unc_constants_from(j);
      const json& cc = field(j, "con_constants");
      ConConstants& k = in.con_constants;
      k.L_grad_tg = field(cc, "L_grad_tg").get<double>();
      k.L_tg = field(cc, "L_tg").get<double>();
      k.tg_hi = field(cc, "tg_hi").get<double>();
      k.L_f = field(cc, "L_f").get<double>();
      k.L_tf = field(cc, "L_tf").get<double>();
      if (cc.contains("slater_G") && !cc.at("slater_G").is_null()) k.slater_G = cc.at("slater_G").get<double>();
      return in;
    }
    throw SchemaError("instance: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("instance: ") + e.what());
  }
}

void save_instance(const std::string& path, const Instance& inst) { write_file(path, instance_to_json(inst)); }

Instance load_instance(const std::string& path) { return instance_from_json(read_file(path)); }

std::string point_to_json(const PointFile& pt) {
  return json{{"x", vec_json(pt.x)}, {"y", vec_json(pt.y)}, {"z", vec_json(pt.z)}}.dump(1);
}

PointFile point_from_json(const std::string& text) {
  const json j = parse(text, "point");
  try {
    PointFile p;
    p.x = vec_from(j, "x", -1);
    p.y = vec_from(j, "y", -1);
    p.z = vec_from(j, "z", -1);
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("point: ") + e.what());
  }
}

void save_point(const std::string& path, const PointFile& pt) { write_file(path, point_to_json(pt)); }

PointFile load_point(const std::string& path) { return point_from_json(read_file(path)); }

}  // namespace bipen
