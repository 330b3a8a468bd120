#include "ssvm/synthetic.hpp"

#include <random>

namespace ssvm {

Dataset generate_synthetic(int grid_w, int grid_h, int num_labels, double noise_sigma,
                           int n_instances, std::uint64_t seed) {
  if (grid_w < 1 || grid_h < 1) throw ValidationError("generate_synthetic: grid dims must be >= 1");
  if (num_labels < 2) throw ValidationError("generate_synthetic: need at least two labels");
  if (noise_sigma < 0.0) throw ValidationError("generate_synthetic: negative noise");
  if (n_instances < 1) throw ValidationError("generate_synthetic: need at least one instance");

  const int n = grid_w * grid_h;
  Dataset d;
  d.num_labels = num_labels;
  d.d_u = num_labels;
  d.d_p = 2;
  d.symmetric = true;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_x(0, grid_w - 1);
  std::uniform_int_distribution<int> pick_y(0, grid_h - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (int inst = 0; inst < n_instances; ++inst) {
    Sample s;
    s.instance.node_count = n;
    s.instance.num_labels = num_labels;

    // contiguous blocks: label by nearest seed cell (Manhattan, ties to the
    // lower seed index)
    std::vector<std::pair<int, int>> seeds(num_labels);
    for (auto& sd : seeds) sd = {pick_x(rng), pick_y(rng)};
    s.truth.resize(n);
    for (int y = 0; y < grid_h; ++y) {
      for (int x = 0; x < grid_w; ++x) {
        int best = 0, best_d = std::abs(x - seeds[0].first) + std::abs(y - seeds[0].second);
        for (int k = 1; k < num_labels; ++k) {
          const int dist = std::abs(x - seeds[k].first) + std::abs(y - seeds[k].second);
          if (dist < best_d) {
            best_d = dist;
            best = k;
          }
        }
        s.truth[y * grid_w + x] = best;
      }
    }

    s.instance.unary_features = Eigen::MatrixXd::Zero(num_labels, n);
    for (int i = 0; i < n; ++i) {
      s.instance.unary_features(s.truth[i], i) = 1.0;
      for (int k = 0; k < num_labels; ++k)
        s.instance.unary_features(k, i) += noise_sigma * noise(rng);
    }

    for (int y = 0; y < grid_h; ++y)
      for (int x = 0; x < grid_w; ++x) {
        const int i = y * grid_w + x;
        if (x + 1 < grid_w) s.instance.edges.emplace_back(i, i + 1);
        if (y + 1 < grid_h) s.instance.edges.emplace_back(i, i + grid_w);
      }
    s.instance.edge_features = Eigen::MatrixXd::Zero(2, s.instance.edges.size());
    for (size_t e = 0; e < s.instance.edges.size(); ++e) {
      const auto& [a, b] = s.instance.edges[e];
      const double contrast = std::abs(s.instance.unary_features.col(a).mean() -
                                       s.instance.unary_features.col(b).mean());
      s.instance.edge_features(0, e) = 1.0;
      s.instance.edge_features(1, e) = contrast;
    }

    s.loss = LossSpec::unit(n);
    d.samples.push_back(std::move(s));
  }
  d.validate();
  return d;
}

}  // namespace ssvm
