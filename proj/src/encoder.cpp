#include "higen/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

namespace higen {

void add_encoder_params(ParameterStore& store, const EncoderConfig& cfg, Rng& rng) {
  int n = cfg.grid * cfg.grid;
  store.add("encoder.conv1.w", uniform_init({cfg.cnn_c1, 1, cfg.kernel, cfg.kernel}, rng));
  store.add("encoder.conv1.b", uniform_init({cfg.cnn_c1}, rng));
  store.add("encoder.conv2.w", uniform_init({cfg.cnn_c2, cfg.cnn_c1, cfg.kernel, cfg.kernel}, rng));
  store.add("encoder.conv2.b", uniform_init({cfg.cnn_c2}, rng));
  store.add("encoder.proj.w", uniform_init({cfg.dim_d, cfg.cnn_c2}, rng));
  store.add("encoder.mlc.w1", uniform_init({cfg.dim_mlc, n * cfg.dim_d}, rng));
  store.add("encoder.mlc.b1", uniform_init({cfg.dim_mlc}, rng));
  store.add("encoder.mlc.w2", uniform_init({cfg.num_tags, cfg.dim_mlc}, rng));
  store.add("encoder.mlc.b2", uniform_init({cfg.num_tags}, rng));
  store.add("encoder.tag_embedding", uniform_init({cfg.num_tags, cfg.dim_e}, rng));
}

EncoderVars register_encoder(Tape& tape, const ParameterStore& store) {
  EncoderVars v;
  v.conv1_w = tape.leaf(store.at("encoder.conv1.w"), "encoder.conv1.w");
  v.conv1_b = tape.leaf(store.at("encoder.conv1.b"), "encoder.conv1.b");
  v.conv2_w = tape.leaf(store.at("encoder.conv2.w"), "encoder.conv2.w");
  v.conv2_b = tape.leaf(store.at("encoder.conv2.b"), "encoder.conv2.b");
  v.proj_w = tape.leaf(store.at("encoder.proj.w"), "encoder.proj.w");
  v.mlc_w1 = tape.leaf(store.at("encoder.mlc.w1"), "encoder.mlc.w1");
  v.mlc_b1 = tape.leaf(store.at("encoder.mlc.b1"), "encoder.mlc.b1");
  v.mlc_w2 = tape.leaf(store.at("encoder.mlc.w2"), "encoder.mlc.w2");
  v.mlc_b2 = tape.leaf(store.at("encoder.mlc.b2"), "encoder.mlc.b2");
  v.tag_embedding = tape.leaf(store.at("encoder.tag_embedding"), "encoder.tag_embedding");
  return v;
}

Var region_features_from_image(Tape& tape, const Tensor& image, const EncoderVars& vars,
                               int grid) {
  if (image.rank() != 2) {
    throw DimensionError("image must be a rank-2 pixel grid, got " + image.shape_str());
  }
  int h = image.dim(0), w = image.dim(1);
  if (grid < 1 || h % (4 * grid) != 0 || w % (4 * grid) != 0) {
    throw DomainError("image dims " + image.shape_str() + " not divisible by 4*grid with grid " +
                      std::to_string(grid));
  }
  Tensor channels({1, h, w}, std::vector<double>(image.data(), image.data() + image.numel()));
  Var x = tape.leaf(std::move(channels));
  x = mean_pool2(tanh(conv2d(x, vars.conv1_w, vars.conv1_b)));
  x = mean_pool2(tanh(conv2d(x, vars.conv2_w, vars.conv2_b)));
  Var pooled = grid_pool(x, grid);                       // [N x C2]
  return matmul(pooled, transpose(vars.proj_w));         // [N x D]
}

Var predict_tags_graph(Var features, const EncoderVars& vars) {
  const Tensor& f = features.value();
  if (f.rank() != 2) {
    throw DimensionError("region features must be [N x D], got " + f.shape_str());
  }
  Var flat = reshape(features, {f.numel()});
  Var hidden = tanh(add(matmul(vars.mlc_w1, flat), vars.mlc_b1));
  Var logits = add(matmul(vars.mlc_w2, hidden), vars.mlc_b2);
  return softmax(logits);
}

Tensor tag_target(const Tensor& binary_tags) {
  if (binary_tags.rank() != 1) {
    throw DimensionError("tag vector must be rank-1, got " + binary_tags.shape_str());
  }
  double total = 0.0;
  for (int i = 0; i < binary_tags.numel(); ++i) {
    double v = binary_tags[i];
    if (v != 0.0 && v != 1.0) throw DomainError("tag vector must be binary");
    total += v;
  }
  if (total == 0.0) throw DomainError("tag vector has no positive entries");
  Tensor out = binary_tags;
  out.flat() /= total;
  return out;
}

std::vector<int> top_m_tags(const Tensor& probs, int m) {
  if (probs.rank() != 1) {
    throw DimensionError("tag distribution must be rank-1, got " + probs.shape_str());
  }
  if (m < 1 || m > probs.numel()) {
    throw DomainError("top_m_tags: m " + std::to_string(m) + " out of range for L " +
                      std::to_string(probs.numel()));
  }
  std::vector<int> ids(static_cast<std::size_t>(probs.numel()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&probs](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  ids.resize(static_cast<std::size_t>(m));
  return ids;
}

Var gather_tag_embeddings(Var tag_embedding, const std::vector<int>& tag_ids) {
  if (tag_ids.empty()) throw DomainError("gather_tag_embeddings: no tag ids");
  std::vector<Var> rows;
  rows.reserve(tag_ids.size());
  for (int id : tag_ids) rows.push_back(row(tag_embedding, id));
  return stack_rows(rows);
}

RegionFeatureMap extract_region_features(const std::string& feature_path) {
  Tensor t = read_tensor_file(feature_path);
  if (t.rank() != 2) {
    throw FormatError("feature file " + feature_path + " must have shape [N x D], got " +
                      t.shape_str());
  }
  return RegionFeatureMap{std::move(t)};
}

RegionFeatureMap extract_region_features(const Tensor& image, const ParameterStore& store,
                                         const EncoderConfig& cfg) {
  Tape tape;
  EncoderVars vars = register_encoder(tape, store);
  Var features = region_features_from_image(tape, image, vars, cfg.grid);
  return RegionFeatureMap{features.value()};
}

TagDistribution predict_tags(const RegionFeatureMap& features, const ParameterStore& store,
                             const EncoderConfig& cfg) {
  (void)cfg;
  Tape tape;
  EncoderVars vars = register_encoder(tape, store);
  Var f = tape.leaf(features.features);
  Var probs = predict_tags_graph(f, vars);
  return TagDistribution{probs.value()};
}

SemanticFeatureSet top_m_semantic_features(const TagDistribution& dist,
                                           const ParameterStore& store, int m) {
  std::vector<int> ids = top_m_tags(dist.probs, m);
  const Tensor& table = store.at("encoder.tag_embedding");
  Tensor rows({static_cast<int>(ids.size()), table.dim(1)});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    rows.matrix().row(static_cast<int>(i)) = table.matrix().row(ids[i]);
  }
  return SemanticFeatureSet{std::move(rows), std::move(ids)};
}

namespace {

// Minimal PGM reader for P2 (ascii) and P5 (binary) with maxval <= 255.
Tensor read_pgm(std::ifstream& in, const std::string& path) {
  std::string magic;
  in >> magic;
  auto skip_junk = [&in]() {
    while (true) {
      int c = in.peek();
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
  };
  skip_junk();
  int w, h, maxval;
  in >> w;
  skip_junk();
  in >> h;
  skip_junk();
  in >> maxval;
  if (!in || w < 1 || h < 1 || maxval < 1 || maxval > 255) {
    throw FormatError("unsupported PGM header in " + path);
  }
  Tensor img({h, w});
  if (magic == "P2") {
    for (int i = 0; i < img.numel(); ++i) {
      int v;
      in >> v;
      if (!in) throw FormatError("truncated P2 data in " + path);
      img[i] = static_cast<double>(v) / maxval;
    }
  } else {
    in.get();  // single whitespace after maxval
    for (int i = 0; i < img.numel(); ++i) {
      int v = in.get();
      if (v == EOF) throw FormatError("truncated P5 data in " + path);
      img[i] = static_cast<double>(v) / maxval;
    }
  }
  return img;
}

}  // namespace

Tensor load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + path);
  char head[4] = {0, 0, 0, 0};
  in.read(head, 4);
  in.seekg(0);
  if (std::string(head, 4) == "HGT1") {
    Tensor t = read_tensor(in, path);
    if (t.rank() != 2) {
      throw FormatError("image tensor " + path + " must be rank-2, got " + t.shape_str());
    }
    return t;
  }
  if (head[0] == 'P' && (head[1] == '2' || head[1] == '5')) return read_pgm(in, path);
  throw FormatError("unrecognized image format in " + path + " (PGM or HGT1 expected)");
}

}  // namespace higen
