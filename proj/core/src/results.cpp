#include "smallbody/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace smallbody {

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";  // d = infinity for single-body scenes
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void dump(const ResultsDoc& v, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad1(2 * (indent + 1), ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++i) {
        out += pad1;
        append_escaped(out, it.key());
        out += ": ";
        dump(it.value(), out, indent + 1);
        if (i + 1 < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Flat arrays of scalars stay on one line.
      bool scalars = true;
      for (const auto& e : v)
        if (e.is_structured()) scalars = false;
      if (scalars) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          dump(v[i], out, indent);
          if (i + 1 < v.size()) out += ", ";
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += pad1;
        dump(v[i], out, indent + 1);
        if (i + 1 < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case nlohmann::json::value_t::string:
      append_escaped(out, v.get_ref<const std::string&>());
      return;
    case nlohmann::json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      return;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      return;
    case nlohmann::json::value_t::number_float:
      append_double(out, v.get<double>());
      return;
    default:
      out += "null";
      return;
  }
}

}  // namespace

std::string dump_results(const ResultsDoc& doc) {
  std::string out;
  dump(doc, out, 0);
  out += '\n';
  return out;
}

std::vector<std::filesystem::path> write_results(
    const ResultsBundle& bundle, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  {
    auto path = out_dir / "results.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << dump_results(bundle.doc);
    written.push_back(path);
  }
  if (!bundle.far_field_lines.empty()) {
    auto path = out_dir / "farfield.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& line : bundle.far_field_lines) out << line << '\n';
    written.push_back(path);
  }
  return written;
}

std::vector<Vec3> default26_directions() {
  std::vector<Vec3> dirs;
  dirs.reserve(26);
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z) {
        if (x == 0 && y == 0 && z == 0) continue;
        dirs.push_back(Vec3(x, y, z).normalized());
      }
  return dirs;
}

}  // namespace smallbody
