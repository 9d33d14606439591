#ifndef XBARFT_IO_HPP
#define XBARFT_IO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xbarft/dataset.hpp"
#include "xbarft/embed.hpp"
#include "xbarft/matrix.hpp"
#include "xbarft/model.hpp"
#include "xbarft/quant.hpp"

namespace xbarft {

// Portable tensor text: first line "# dims R C", then R lines of C values,
// 17 significant digits so doubles round-trip exactly.
void save_tensor(const std::string& path, const Matrix& m);
Matrix load_tensor(const std::string& path);

std::string format_double(double v);  // %.17g

// One decimal index per line.
void save_index_list(const std::string& path, const std::vector<std::size_t>& v);
std::vector<std::size_t> load_index_list(const std::string& path);

// Header "# placement <bits> <candidates> <columns>", then one assignment
// per line: "k src_col host_plane host_col".
void save_placement(const std::string& path, const PlacementMap& map);
PlacementMap load_placement(const std::string& path);

// Flat "key = value" text with '#' comments and dotted keys.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& dflt) const;

 private:
  std::map<std::string, std::string> values_;
};

// Model directory: model.txt manifest ("layers = N") plus per-layer
// layer<k>_weight.txt / layer<k>_bias.txt tensors and an optional
// layer<k>_index.txt pruned-column list.
void save_model(const std::string& dir, const Model& model);
Model load_model(const std::string& dir);

// Dataset directory: train_x/train_y/test_x/test_y tensors (labels are
// single-column matrices).
void save_dataset(const std::string& dir, const Dataset& data);
Dataset load_dataset(const std::string& dir);

// Quantized layer text: "# quant R C bits q", sign rows, then per plane a
// "# plane <p> power <w>" line followed by the bit rows.
void save_quantized(const std::string& path, const QuantizedLayer& layer);
QuantizedLayer load_quantized(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace xbarft

#endif
