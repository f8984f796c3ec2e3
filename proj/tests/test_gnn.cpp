#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "vgecg/gnn.hpp"
#include "vgecg/train.hpp"

using namespace vgecg;

namespace {

std::vector<double> flat(const Matrix& m) { return m.values(); }

void require_close(const Matrix& a, const oracle::Dense& b, double tol) {
  REQUIRE(a.rows() == b.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    REQUIRE(a.cols() == b[i].size());
    for (std::size_t j = 0; j < a.cols(); ++j) REQUIRE(std::abs(a(i, j) - b[i][j]) <= tol);
  }
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Sum of out ⊙ r: its gradient with respect to out is r.
double weighted_sum(const Matrix& out, const Matrix& r) {
  double s = 0;
  for (std::size_t i = 0; i < out.values().size(); ++i) s += out.values()[i] * r.values()[i];
  return s;
}

BeatGraph directed_random(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  BeatGraph g;
  g.n = n;
  g.directed = true;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      if (b == a + 1 || rng() % 3 == 0) g.edges.push_back({a, b});
  g.features = oracle::random_matrix(n, d, rng);
  return g;
}

std::vector<BeatGraph> random_batch(std::mt19937_64& rng, std::size_t count, std::size_t d) {
  std::vector<BeatGraph> gs;
  for (std::size_t i = 0; i < count; ++i)
    gs.push_back(oracle::random_graph(2 + rng() % 6, d, rng, kClassifiedLabels[i % 3]));
  return gs;
}

}  // namespace

TEST_SUITE("gnn") {
  TEST_CASE("GraphConv on trivial graphs") {
    BeatGraph single;
    single.n = 1;
    single.features = Matrix(1, 3);
    single.features(0, 0) = 0.5;
    single.features(0, 1) = 2.0;
    single.features(0, 2) = 0.0;
    const auto b = make_batch(std::span<const BeatGraph>(&single, 1));
    Matrix eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1;
    const std::vector<double> zero(3, 0.0);
    CHECK(graphconv_forward(b.x, b, eye, zero) == single.features);

    BeatGraph pair;
    pair.n = 2;
    pair.edges = {{0, 1}, {1, 0}};
    pair.features = Matrix(2, 3, 0.7);
    std::mt19937_64 rng(1);
    const auto w = oracle::random_matrix(3, 4, rng);
    const auto out = graphconv_forward(pair.features, make_batch(std::span<const BeatGraph>(&pair, 1)), w,
                                       std::vector<double>(4, 0.1));
    for (std::size_t j = 0; j < 4; ++j) CHECK(out(0, j) == out(1, j));
  }

  TEST_CASE("GraphConv without edges is a dense layer") {
    std::mt19937_64 rng(2);
    BeatGraph g;
    g.n = 5;
    g.features = oracle::random_matrix(5, 4, rng);
    const auto w = oracle::random_matrix(4, 3, rng);
    const auto bias = random_vec(3, rng);
    const auto out = graphconv_forward(g.features, make_batch(std::span<const BeatGraph>(&g, 1)), w, bias, false);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t o = 0; o < 3; ++o) {
        double s = bias[o];
        for (std::size_t k = 0; k < 4; ++k) s += g.features(i, k) * w(k, o);
        CHECK(out(i, o) == doctest::Approx(s).epsilon(1e-12));
      }
  }

  TEST_CASE("GraphConv and SAGEConv match dense oracles") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
      const bool directed = t % 3 == 2;
      std::vector<BeatGraph> gs;
      for (int k = 0; k < 3; ++k) {
        gs.push_back(directed ? directed_random(2 + rng() % 6, 4, rng) : oracle::random_graph(2 + rng() % 6, 4, rng, AamiLabel::N));
        gs.back().label = AamiLabel::N;
      }
      const auto batch = make_batch(gs);
      const auto adj = oracle::batch_adjacency(gs);
      const auto h = oracle::to_dense(batch.x);
      const bool act = t % 2 == 0;

      const auto w = oracle::random_matrix(4, 5, rng);
      const auto bias = random_vec(5, rng);
      require_close(graphconv_forward(batch.x, batch, w, bias, act),
                    oracle::graphconv(adj, directed, h, oracle::to_dense(w), bias, act), 1e-10);

      const auto ws = oracle::random_matrix(8, 5, rng);
      const auto nbh = sample_neighbourhood(batch, 0, nullptr);
      require_close(sageconv_forward(batch.x, nbh, ws, bias, act), oracle::sageconv(adj, h, oracle::to_dense(ws), bias, act),
                    1e-10);
    }
  }

  TEST_CASE("SAGEConv special cases") {
    std::mt19937_64 rng(4);
    // Star: centre 0 with four leaves sharing feature f.
    BeatGraph star;
    star.n = 5;
    for (std::uint32_t v = 1; v < 5; ++v) {
      star.edges.push_back({0, v});
      star.edges.push_back({v, 0});
    }
    std::sort(star.edges.begin(), star.edges.end());
    star.features = Matrix(5, 2);
    star.features(0, 0) = -3;
    star.features(0, 1) = 4;
    for (std::size_t v = 1; v < 5; ++v) {
      star.features(v, 0) = 0.25;
      star.features(v, 1) = 1.5;
    }
    const auto batch = make_batch(std::span<const BeatGraph>(&star, 1));
    const auto nbh = sample_neighbourhood(batch, 0, nullptr);
    // W picks out the aggregated half.
    Matrix w(4, 2);
    w(2, 0) = 1;
    w(3, 1) = 1;
    const auto out = sageconv_forward(batch.x, nbh, w, std::vector<double>(2, 0.0), false);
    CHECK(out(0, 0) == doctest::Approx(0.25));
    CHECK(out(0, 1) == doctest::Approx(1.5));

    // Isolated node aggregates the zero vector.
    BeatGraph iso;
    iso.n = 1;
    iso.features = oracle::random_matrix(1, 2, rng);
    const auto ib = make_batch(std::span<const BeatGraph>(&iso, 1));
    const auto wi = oracle::random_matrix(4, 3, rng);
    const auto io = sageconv_forward(ib.x, sample_neighbourhood(ib, 0, nullptr), wi, std::vector<double>(3, 0.0), false);
    for (std::size_t o = 0; o < 3; ++o)
      CHECK(io(0, o) == doctest::Approx(iso.features(0, 0) * wi(0, o) + iso.features(0, 1) * wi(1, o)));

    // Sampling draws min(k, degree) distinct neighbours.
    auto g = oracle::random_graph(12, 2, rng, AamiLabel::N, 0.6);
    const auto gb = make_batch(std::span<const BeatGraph>(&g, 1));
    std::mt19937_64 srng(9);
    const auto sampled = sample_neighbourhood(gb, 3, &srng);
    for (std::size_t v = 0; v < 12; ++v) {
      const std::size_t deg = gb.nbr_ptr[v + 1] - gb.nbr_ptr[v];
      std::set<std::uint32_t> all(gb.nbr.begin() + gb.nbr_ptr[v], gb.nbr.begin() + gb.nbr_ptr[v + 1]);
      std::set<std::uint32_t> got(sampled.idx.begin() + sampled.ptr[v], sampled.idx.begin() + sampled.ptr[v + 1]);
      CHECK(got.size() == std::min<std::size_t>(3, deg));
      CHECK(sampled.ptr[v + 1] - sampled.ptr[v] == got.size());
      for (auto u : got) CHECK(all.count(u) == 1);
    }
    CHECK_THROWS(sample_neighbourhood(gb, 3, nullptr));
  }

  TEST_CASE("readout and loss") {
    std::mt19937_64 rng(5);
    BeatGraph same;
    same.n = 4;
    same.features = Matrix(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
      same.features(i, 0) = 1.5;
      same.features(i, 1) = -2;
      same.features(i, 2) = 0.25;
    }
    const auto sb = make_batch(std::span<const BeatGraph>(&same, 1));
    const auto r = readout_mean(sb.x, sb);
    CHECK(r.rows() == 1);
    CHECK(r(0, 0) == 1.5);
    CHECK(r(0, 1) == -2);
    CHECK(r(0, 2) == 0.25);

    std::vector<BeatGraph> two = {oracle::random_graph(1, 5, rng, AamiLabel::N), oracle::random_graph(3, 5, rng, AamiLabel::S)};
    const auto tb = make_batch(two);
    const auto tr = readout_mean(tb.x, tb);
    CHECK(tr.rows() == 2);
    CHECK(tr.cols() == 5);

    for (int t = 0; t < 10; ++t) {
      const auto gs = random_batch(rng, 6, 4);
      const auto b = make_batch(gs);
      std::vector<std::size_t> sizes;
      for (const auto& g : gs) sizes.push_back(g.n);
      require_close(readout_mean(b.x, b), oracle::readout(oracle::to_dense(b.x), sizes), 1e-12);

      const auto logits = oracle::random_matrix(6, 3, rng, -4, 4);
      const auto p = softmax_rows(logits);
      for (std::size_t i = 0; i < 6; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 3; ++j) {
          CHECK(p(i, j) > 0.0);
          CHECK(p(i, j) < 1.0);
          s += p(i, j);
        }
        CHECK(std::abs(s - 1) < 1e-6);
      }
      CHECK(std::abs(cross_entropy(p, b.labels) - oracle::softmax_ce(oracle::to_dense(logits), b.labels)) < 1e-10);
    }

    Matrix certain(1, 3);
    certain(0, 1) = 1.0;
    CHECK(cross_entropy(certain, std::vector<std::size_t>{1}) == 0.0);
    CHECK(cross_entropy(certain, std::vector<std::size_t>{0}) == doctest::Approx(-std::log(1e-12)));
    CHECK(cross_entropy(Matrix(1, 3, 1.0 / 3), std::vector<std::size_t>{2}) == doctest::Approx(std::log(3.0)));
  }

  TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(6);
    std::vector<BeatGraph> g = {oracle::random_graph(5, 3, rng, AamiLabel::S)};
    const auto batch = make_batch(g);
    const auto r = oracle::random_matrix(5, 4, rng);
    const double tol = 1e-4;

    for (bool relu : {false, true}) {
      Matrix h = batch.x;
      Matrix w = oracle::random_matrix(3, 4, rng);
      std::vector<double> bias = random_vec(4, rng);
      auto loss = [&] { return weighted_sum(graphconv_forward(h, batch, w, bias, relu), r); };
      const auto out = graphconv_forward(h, batch, w, bias, relu);
      const auto cg = graphconv_backward(h, batch, w, out, r, relu);
      CHECK(oracle::max_relative_error(flat(cg.weight), oracle::numeric_gradient(w.values(), loss)) < tol);
      CHECK(oracle::max_relative_error(cg.bias, oracle::numeric_gradient(bias, loss)) < tol);
      CHECK(oracle::max_relative_error(flat(cg.input), oracle::numeric_gradient(h.values(), loss)) < tol);
    }

    for (bool l2 : {false, true})
      for (bool relu : {false, true}) {
        const auto nbh = sample_neighbourhood(batch, 0, nullptr);
        Matrix h = batch.x;
        Matrix w = oracle::random_matrix(6, 4, rng);
        std::vector<double> bias = random_vec(4, rng);
        const SageOptions opts{l2};
        auto loss = [&] { return weighted_sum(sageconv_forward(h, nbh, w, bias, relu, opts), r); };
        const auto out = sageconv_forward(h, nbh, w, bias, relu, opts);
        const auto cg = sageconv_backward(h, nbh, w, bias, out, r, relu, opts);
        CHECK(oracle::max_relative_error(flat(cg.weight), oracle::numeric_gradient(w.values(), loss)) < tol);
        CHECK(oracle::max_relative_error(cg.bias, oracle::numeric_gradient(bias, loss)) < tol);
        CHECK(oracle::max_relative_error(flat(cg.input), oracle::numeric_gradient(h.values(), loss)) < tol);
      }

    {
      Matrix h = oracle::random_matrix(5, 4, rng);
      const auto rr = oracle::random_matrix(1, 4, rng);
      auto loss = [&] { return weighted_sum(readout_mean(h, batch), rr); };
      CHECK(oracle::max_relative_error(flat(readout_mean_backward(rr, batch)), oracle::numeric_gradient(h.values(), loss)) <
            tol);
    }
    {
      Matrix logits = oracle::random_matrix(4, 3, rng, -3, 3);
      const std::vector<std::size_t> labels = {0, 2, 1, 2};
      auto loss = [&] { return cross_entropy(softmax_rows(logits), labels); };
      const auto analytic = softmax_cross_entropy_backward(softmax_rows(logits), labels);
      CHECK(oracle::max_relative_error(flat(analytic), oracle::numeric_gradient(logits.values(), loss)) < tol);
    }
  }

  TEST_CASE("model backward matches central differences") {
    std::mt19937_64 rng(7);
    const auto gs = random_batch(rng, 4, 5);
    const auto batch = make_batch(gs);
    for (auto arch : {Architecture::GCN2, Architecture::GCN7, Architecture::GCN60}) {
      GcnModel model = build_architecture(arch, 5, 11, {.sage_l2_normalize = arch == Architecture::GCN60});
      ForwardTrace trace;
      model.forward(batch, nullptr, &trace);
      const auto grads = model.backward(batch, trace);
      auto loss = [&] { return cross_entropy(model.forward(batch), batch.labels); };
      for (std::size_t l = 0; l < model.layers().size(); ++l) {
        auto& layer = model.layers()[l];
        CHECK(oracle::max_relative_error(flat(grads.weight[l]), oracle::numeric_gradient(layer.weight.values(), loss)) <
              1e-4);
        CHECK(oracle::max_relative_error(grads.bias[l], oracle::numeric_gradient(layer.bias, loss)) < 1e-4);
      }
    }
  }

  TEST_CASE("permutation equivariance and invariance") {
    std::mt19937_64 rng(8);
    const auto g = oracle::random_graph(7, 3, rng, AamiLabel::V);
    std::vector<std::uint32_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    BeatGraph p = g;
    p.edges.clear();
    for (auto [u, v] : g.edges) p.edges.push_back({perm[u], perm[v]});
    std::sort(p.edges.begin(), p.edges.end());
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t k = 0; k < 3; ++k) p.features(perm[i], k) = g.features(i, k);

    const auto bg = make_batch(std::span<const BeatGraph>(&g, 1));
    const auto bp = make_batch(std::span<const BeatGraph>(&p, 1));
    const auto w = oracle::random_matrix(3, 4, rng);
    const auto ws = oracle::random_matrix(6, 4, rng);
    const auto bias = random_vec(4, rng);
    const auto og = graphconv_forward(bg.x, bg, w, bias);
    const auto op = graphconv_forward(bp.x, bp, w, bias);
    const auto sg = sageconv_forward(bg.x, sample_neighbourhood(bg, 0, nullptr), ws, bias);
    const auto sp = sageconv_forward(bp.x, sample_neighbourhood(bp, 0, nullptr), ws, bias);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(og(i, k) == doctest::Approx(op(perm[i], k)).epsilon(1e-12));
        CHECK(sg(i, k) == doctest::Approx(sp(perm[i], k)).epsilon(1e-12));
      }
    const auto model = build_architecture(Architecture::GCN7, 3, 5);
    const auto pg = model.forward(bg), pp = model.forward(bp);
    for (std::size_t k = 0; k < 3; ++k) CHECK(pg(0, k) == doctest::Approx(pp(0, k)).epsilon(1e-12));
  }

  TEST_CASE("architectures") {
    const auto gcn2 = architecture_layers(Architecture::GCN2, 22);
    REQUIRE(gcn2.size() == 2);
    CHECK(gcn2[0].in_dim == 22);
    CHECK(gcn2[0].out_dim == 20);
    CHECK(gcn2[1].in_dim == 20);
    CHECK(gcn2[1].out_dim == 3);
    CHECK(gcn2[0].kind == LayerKind::GraphConv);
    CHECK(architecture_layers(Architecture::GCN240, 8).back().out_dim == 3);
    CHECK(architecture_layers(Architecture::GCN7, 8).size() == 7);
    for (auto arch : {Architecture::GCN2, Architecture::GCN7, Architecture::GCN60, Architecture::GCN120,
                      Architecture::GCN240}) {
      CHECK(parse_architecture(architecture_name(arch)) == arch);
      for (std::size_t d : {3u, 22u}) {
        const auto layers = architecture_layers(arch, d);
        std::size_t in = d;
        for (const auto& l : layers) {
          CHECK(l.in_dim == in);
          in = l.out_dim;
        }
        CHECK(in == 3);
        const auto model = build_architecture(arch, d, 1);
        for (const auto& l : model.layers())
          CHECK(l.weight.rows() == (l.spec.kind == LayerKind::SAGEConv ? 2 : 1) * l.spec.in_dim);
      }
    }
    CHECK(build_architecture(Architecture::GCN2, 22).parameter_count() == 22 * 20 + 20 + 20 * 3 + 3);

    auto bad = build_architecture(Architecture::GCN2, 4, 1).layers();
    bad[1].spec.in_dim = 7;
    CHECK_THROWS_AS(GcnModel(Architecture::GCN2, 4, bad, {}), std::invalid_argument);
  }

  TEST_CASE("model checkpoint round-trip") {
    std::mt19937_64 rng(9);
    const auto model = build_architecture(Architecture::GCN7, 8, 3, {.sage_sample_size = 4, .relu_on_last = true});
    const auto text = model_to_json(model).dump();
    const auto back = model_from_json(nlohmann::json::parse(text));
    CHECK(back.architecture() == model.architecture());
    CHECK(back.input_dim() == 8);
    CHECK(back.options().sage_sample_size == 4);
    CHECK(back.options().relu_on_last);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
      CHECK(back.layers()[l].weight == model.layers()[l].weight);
      CHECK(back.layers()[l].bias == model.layers()[l].bias);
    }
  }

  TEST_CASE("training") {
    std::mt19937_64 rng(10);
    auto gs = random_batch(rng, 10, 3);
    // Make the classes separable through the mean of feature 0.
    for (auto& g : gs)
      for (std::size_t i = 0; i < g.n; ++i) g.features(i, 0) += 2.0 * static_cast<double>(*class_index(g.label));

    const auto init = build_architecture(Architecture::GCN2, 3, 4);
    TrainConfig frozen{.epochs = 5, .lr = 0.0, .batch_size = 3, .seed = 1};
    const auto still = train(init, gs, frozen);
    for (std::size_t l = 0; l < init.layers().size(); ++l) {
      CHECK(still.model.layers()[l].weight == init.layers()[l].weight);
      CHECK(still.model.layers()[l].bias == init.layers()[l].bias);
    }

    TrainConfig tc{.epochs = 150, .lr = 0.01, .batch_size = 10, .seed = 2};
    const auto fit = train(init, gs, tc);
    REQUIRE(fit.log.size() == 150);
    CHECK(fit.log.back().train_accuracy == 1.0);
    const auto pred = predict_graphs(fit.model, gs);
    for (std::size_t i = 0; i < gs.size(); ++i) CHECK(pred[i] == *class_index(gs[i].label));

    const auto again = train(init, gs, tc);
    std::ostringstream a, b;
    write_loss_log_csv(a, fit.log);
    write_loss_log_csv(b, again.log);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("epoch,loss,train_acc\n", 0) == 0);

    // Sampled SAGE aggregation is seeded too.
    const auto sage = build_architecture(Architecture::GCN60, 3, 4, {.sage_sample_size = 2});
    TrainConfig sc{.epochs = 3, .lr = 0.01, .batch_size = 4, .seed = 8};
    CHECK(train(sage, gs, sc).log == train(sage, gs, sc).log);

    BeatGraph fq = gs[0];
    fq.label = AamiLabel::F;
    CHECK_THROWS_AS(make_batch(std::span<const BeatGraph>(&fq, 1)), std::invalid_argument);
  }
}
