#include "higen/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace higen {

EncoderConfig TrainConfig::encoder() const {
  EncoderConfig e;
  e.grid = grid;
  e.dim_d = dim_d;
  e.dim_e = dim_e;
  e.dim_mlc = dim_mlc;
  e.num_tags = num_tags;
  e.cnn_c1 = cnn_c1;
  e.cnn_c2 = cnn_c2;
  return e;
}

CoAttentionConfig TrainConfig::coattention() const {
  CoAttentionConfig c;
  c.dim_d = dim_d;
  c.dim_e = dim_e;
  c.dim_c = dim_c;
  c.dim_h = dim_h;
  c.dim_ha = dim_ha;
  return c;
}

DecoderConfig TrainConfig::decoder() const {
  DecoderConfig d;
  d.dim_c = dim_c;
  d.dim_k = dim_k;
  d.dim_h = dim_h;
  d.dim_hs = dim_hs;
  d.vocab_size = vocab_size;
  return d;
}

namespace {

struct Field {
  const char* key;
  enum Kind { kInt, kDouble, kU64, kBool, kMode } kind;
  void* (*ptr)(TrainConfig&);
};

template <auto Member>
void* member_ptr(TrainConfig& cfg) {
  return &(cfg.*Member);
}

const Field kFields[] = {
    {"dim_d", Field::kInt, member_ptr<&TrainConfig::dim_d>},
    {"dim_e", Field::kInt, member_ptr<&TrainConfig::dim_e>},
    {"dim_c", Field::kInt, member_ptr<&TrainConfig::dim_c>},
    {"dim_k", Field::kInt, member_ptr<&TrainConfig::dim_k>},
    {"dim_h", Field::kInt, member_ptr<&TrainConfig::dim_h>},
    {"dim_ha", Field::kInt, member_ptr<&TrainConfig::dim_ha>},
    {"dim_hs", Field::kInt, member_ptr<&TrainConfig::dim_hs>},
    {"dim_mlc", Field::kInt, member_ptr<&TrainConfig::dim_mlc>},
    {"num_tags", Field::kInt, member_ptr<&TrainConfig::num_tags>},
    {"vocab_size", Field::kInt, member_ptr<&TrainConfig::vocab_size>},
    {"grid", Field::kInt, member_ptr<&TrainConfig::grid>},
    {"top_m", Field::kInt, member_ptr<&TrainConfig::top_m>},
    {"cnn_c1", Field::kInt, member_ptr<&TrainConfig::cnn_c1>},
    {"cnn_c2", Field::kInt, member_ptr<&TrainConfig::cnn_c2>},
    {"lambda_tag", Field::kDouble, member_ptr<&TrainConfig::lambda_tag>},
    {"lambda_sent", Field::kDouble, member_ptr<&TrainConfig::lambda_sent>},
    {"lambda_word", Field::kDouble, member_ptr<&TrainConfig::lambda_word>},
    {"lambda_reg", Field::kDouble, member_ptr<&TrainConfig::lambda_reg>},
    {"lr_cnn", Field::kDouble, member_ptr<&TrainConfig::lr_cnn>},
    {"lr_rnn", Field::kDouble, member_ptr<&TrainConfig::lr_rnn>},
    {"epochs", Field::kInt, member_ptr<&TrainConfig::epochs>},
    {"patience", Field::kInt, member_ptr<&TrainConfig::patience>},
    {"seed", Field::kU64, member_ptr<&TrainConfig::seed>},
    {"stop_threshold", Field::kDouble, member_ptr<&TrainConfig::stop_threshold>},
    {"s_max", Field::kInt, member_ptr<&TrainConfig::s_max>},
    {"t_max", Field::kInt, member_ptr<&TrainConfig::t_max>},
    {"attention_mode", Field::kMode, member_ptr<&TrainConfig::attention_mode>},
    {"use_true_tags", Field::kBool, member_ptr<&TrainConfig::use_true_tags>},
    {"val_count", Field::kInt, member_ptr<&TrainConfig::val_count>},
    {"test_count", Field::kInt, member_ptr<&TrainConfig::test_count>},
    {"vocab_cap", Field::kInt, member_ptr<&TrainConfig::vocab_cap>},
    {"tfidf_k", Field::kInt, member_ptr<&TrainConfig::tfidf_k>},
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& origin) {
  for (const Field& f : kFields) {
    if (key != f.key) continue;
    try {
      switch (f.kind) {
        case Field::kInt:
          *static_cast<int*>(f.ptr(cfg)) = std::stoi(value);
          return;
        case Field::kDouble:
          *static_cast<double*>(f.ptr(cfg)) = std::stod(value);
          return;
        case Field::kU64:
          *static_cast<std::uint64_t*>(f.ptr(cfg)) = std::stoull(value);
          return;
        case Field::kBool:
          if (value == "true" || value == "1") {
            *static_cast<bool*>(f.ptr(cfg)) = true;
          } else if (value == "false" || value == "0") {
            *static_cast<bool*>(f.ptr(cfg)) = false;
          } else {
            throw DataError(origin + ": bad boolean '" + value + "' for " + key);
          }
          return;
        case Field::kMode:
          *static_cast<AttentionMode*>(f.ptr(cfg)) = parse_attention_mode(value);
          return;
      }
    } catch (const std::invalid_argument&) {
      throw DataError(origin + ": bad value '" + value + "' for " + key);
    } catch (const std::out_of_range&) {
      throw DataError(origin + ": value out of range '" + value + "' for " + key);
    }
  }
  throw DataError(origin + ": unknown config key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text, const std::string& origin) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                      origin + ":" + std::to_string(line_no));
  }
  return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  TrainConfig& mutable_cfg = const_cast<TrainConfig&>(cfg);
  for (const Field& f : kFields) {
    out << f.key << " = ";
    switch (f.kind) {
      case Field::kInt: out << *static_cast<int*>(f.ptr(mutable_cfg)); break;
      case Field::kDouble: out << *static_cast<double*>(f.ptr(mutable_cfg)); break;
      case Field::kU64: out << *static_cast<std::uint64_t*>(f.ptr(mutable_cfg)); break;
      case Field::kBool: out << (*static_cast<bool*>(f.ptr(mutable_cfg)) ? "true" : "false"); break;
      case Field::kMode:
        out << attention_mode_name(*static_cast<AttentionMode*>(f.ptr(mutable_cfg)));
        break;
    }
    out << '\n';
  }
  return out.str();
}

void print_config(std::ostream& out, const TrainConfig& cfg) { out << config_text(cfg); }

}  // namespace higen
