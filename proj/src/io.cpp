#include "xbarft/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace xbarft {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_tensor(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  out << "# dims " << m.rows << ' ' << m.cols << '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ' ';
      out << format_double(m.at(i, j));
    }
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

Matrix load_tensor(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string hash, word;
  std::size_t rows = 0, cols = 0;
  if (!(in >> hash >> word >> rows >> cols) || hash != "#" || word != "dims")
    fail(path, "missing '# dims R C' header");
  Matrix m(rows, cols);
  for (double& v : m.data)
    if (!(in >> v)) fail(path, "truncated tensor body");
  return m;
}

void save_index_list(const std::string& path, const std::vector<std::size_t>& v) {
  std::ofstream out = open_out(path);
  for (std::size_t i : v) out << i << '\n';
  if (!out) fail(path, "write failed");
}

std::vector<std::size_t> load_index_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::size_t> v;
  std::size_t i;
  while (in >> i) v.push_back(i);
  return v;
}

void save_placement(const std::string& path, const PlacementMap& map) {
  std::ofstream out = open_out(path);
  out << "# placement " << map.bits << ' ' << map.candidates << ' ' << map.columns
      << '\n';
  for (const Assignment& a : map.assignments)
    out << a.candidate << ' ' << a.src_col << ' ' << a.host_plane << ' '
        << a.host_col << '\n';
  if (!out) fail(path, "write failed");
}

PlacementMap load_placement(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string hash, word;
  PlacementMap map;
  if (!(in >> hash >> word >> map.bits >> map.candidates >> map.columns) ||
      hash != "#" || word != "placement")
    fail(path, "missing '# placement bits candidates columns' header");
  Assignment a;
  std::vector<std::uint8_t> is_pruned(map.columns, 0);
  while (in >> a.candidate >> a.src_col >> a.host_plane >> a.host_col) {
    if (a.host_col >= map.columns) fail(path, "host column out of range");
    is_pruned[a.host_col] = 1;
    map.assignments.push_back(a);
  }
  for (std::size_t j = 0; j < map.columns; ++j)
    if (is_pruned[j]) map.pruned_index.push_back(j);
  return map;
}

Config Config::parse_file(const std::string& path) {
  return parse_string(read_text_file(path));
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected 'key = value', got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key in: " + line);
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  return std::stod(it->second);
}

int Config::get_int(const std::string& key, int dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  return std::stoi(it->second);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  return std::stoull(it->second);
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  std::vector<double> out;
  for (const std::string& p : split_list(it->second)) out.push_back(std::stod(p));
  return out;
}

std::vector<std::string> Config::get_string_list(
    const std::string& key, const std::vector<std::string>& dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  return split_list(it->second);
}

namespace {

std::string layer_file(const std::string& dir, std::size_t k, const char* kind) {
  return dir + "/layer" + std::to_string(k) + "_" + kind + ".txt";
}

Matrix row_vector(const std::vector<double>& v) {
  Matrix m(1, v.size());
  m.data = v;
  return m;
}

}  // namespace

void save_model(const std::string& dir, const Model& model) {
  fs::create_directories(dir);
  std::ofstream manifest = open_out(dir + "/model.txt");
  manifest << "layers = " << model.layers.size() << '\n';
  if (!manifest) fail(dir, "write failed");
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerSpec& layer = model.layers[k];
    save_tensor(layer_file(dir, k, "weight"), layer.weight);
    save_tensor(layer_file(dir, k, "bias"), row_vector(layer.bias));
    if (!layer.pruned_cols.empty())
      save_index_list(layer_file(dir, k, "index"), layer.pruned_cols);
  }
}

Model load_model(const std::string& dir) {
  const Config manifest = Config::parse_file(dir + "/model.txt");
  const int layers = manifest.get_int("layers", -1);
  if (layers <= 0) fail(dir + "/model.txt", "bad or missing 'layers'");
  Model model;
  for (std::size_t k = 0; k < static_cast<std::size_t>(layers); ++k) {
    LayerSpec layer;
    layer.weight = load_tensor(layer_file(dir, k, "weight"));
    const Matrix bias = load_tensor(layer_file(dir, k, "bias"));
    layer.bias = bias.data;
    if (bias.cols != layer.weight.cols)
      fail(layer_file(dir, k, "bias"), "bias length != weight columns");
    const std::string index_path = layer_file(dir, k, "index");
    if (fs::exists(index_path)) layer.pruned_cols = load_index_list(index_path);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void save_dataset(const std::string& dir, const Dataset& data) {
  fs::create_directories(dir);
  auto labels = [](const std::vector<int>& y) {
    Matrix m(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) m.data[i] = y[i];
    return m;
  };
  save_tensor(dir + "/train_x.txt", data.train_x);
  save_tensor(dir + "/train_y.txt", labels(data.train_y));
  save_tensor(dir + "/test_x.txt", data.test_x);
  save_tensor(dir + "/test_y.txt", labels(data.test_y));
}

Dataset load_dataset(const std::string& dir) {
  Dataset data;
  data.train_x = load_tensor(dir + "/train_x.txt");
  data.test_x = load_tensor(dir + "/test_x.txt");
  auto labels = [&](const std::string& path, std::size_t want) {
    const Matrix m = load_tensor(path);
    if (m.cols != 1 || m.rows != want) fail(path, "bad label tensor shape");
    std::vector<int> y(m.rows);
    int top = 0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      y[i] = static_cast<int>(m.data[i]);
      if (y[i] < 0) fail(path, "negative label");
      top = std::max(top, y[i]);
    }
    data.classes = std::max(data.classes, top + 1);
    return y;
  };
  data.train_y = labels(dir + "/train_y.txt", data.train_x.rows);
  data.test_y = labels(dir + "/test_y.txt", data.test_x.rows);
  return data;
}

void save_quantized(const std::string& path, const QuantizedLayer& layer) {
  std::ofstream out = open_out(path);
  out << "# quant " << layer.rows << ' ' << layer.cols << ' ' << layer.bits << ' '
      << format_double(layer.q) << '\n';
  for (std::size_t i = 0; i < layer.rows; ++i) {
    for (std::size_t j = 0; j < layer.cols; ++j) {
      if (j) out << ' ';
      out << static_cast<int>(layer.sign.at(i, j));
    }
    out << '\n';
  }
  for (std::size_t p = 0; p < layer.planes.size(); ++p) {
    out << "# plane " << p << " power " << (layer.bits - 1 - static_cast<int>(p))
        << '\n';
    for (std::size_t i = 0; i < layer.rows; ++i) {
      for (std::size_t j = 0; j < layer.cols; ++j) {
        if (j) out << ' ';
        out << static_cast<int>(layer.planes[p].at(i, j));
      }
      out << '\n';
    }
  }
  if (!out) fail(path, "write failed");
}

QuantizedLayer load_quantized(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string hash, word;
  QuantizedLayer layer;
  if (!(in >> hash >> word >> layer.rows >> layer.cols >> layer.bits >> layer.q) ||
      hash != "#" || word != "quant")
    fail(path, "missing '# quant R C bits q' header");
  layer.sign = SignMatrix(layer.rows, layer.cols);
  for (auto& s : layer.sign.data) {
    int v;
    if (!(in >> v) || (v != 1 && v != -1)) fail(path, "bad sign entry");
    s = static_cast<std::int8_t>(v);
  }
  layer.planes.assign(static_cast<std::size_t>(layer.bits),
                      BitMatrix(layer.rows, layer.cols));
  for (std::size_t p = 0; p < layer.planes.size(); ++p) {
    std::size_t idx;
    int power;
    if (!(in >> hash >> word >> idx >> word >> power) || hash != "#" || idx != p)
      fail(path, "missing plane header");
    for (auto& b : layer.planes[p].data) {
      int v;
      if (!(in >> v) || (v != 0 && v != 1)) fail(path, "bad plane bit");
      b = static_cast<std::uint8_t>(v);
    }
  }
  return layer;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) fail(path, "write failed");
}

}  // namespace xbarft
