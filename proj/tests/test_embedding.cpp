#include <doctest.h>

#include <cmath>

#include "hgpl/embedding.hpp"
#include "hgpl/error.hpp"
#include "hgpl/objectives.hpp"
#include "test_support.hpp"

using namespace hgpl;

namespace {

Matrix rows_2x2() {
  Matrix m(2, 2);
  m.at(0, 0) = 1.0;
  m.at(0, 1) = 2.0;
  m.at(1, 0) = 3.0;
  m.at(1, 1) = 4.0;
  return m;
}

}  // namespace

TEST_CASE("readout: identity prompt on a single node returns that embedding") {
  const Matrix m = rows_2x2();
  const std::vector<double> ones = {1.0, 1.0};
  const auto r = readout(m, {1}, &ones);
  CHECK(r == std::vector<double>{3.0, 4.0});
}

TEST_CASE("readout: zero prompt zeroes the output") {
  const Matrix m = rows_2x2();
  const std::vector<double> zeros = {0.0, 0.0};
  const auto r = readout(m, {0, 1}, &zeros);
  CHECK(r == std::vector<double>{0.0, 0.0});
}

TEST_CASE("readout: hand-computed prompted mean") {
  // rows {[1,2],[3,4]}, prompt [2,0] -> mean([2,0],[6,0]) = [4,0]
  const Matrix m = rows_2x2();
  const std::vector<double> p = {2.0, 0.0};
  const auto r = readout(m, {0, 1}, &p);
  CHECK(r[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(r[1] == 0.0);
}

TEST_CASE("readout: empty node set gives the zero vector; order is irrelevant") {
  const Matrix m = rows_2x2();
  CHECK(readout(m, {}, nullptr) == std::vector<double>{0.0, 0.0});
  CHECK(readout(m, {0, 1}, nullptr) == readout(m, {1, 0}, nullptr));
}

TEST_CASE("readout: prompt dimension mismatch") {
  const Matrix m = rows_2x2();
  const std::vector<double> bad = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(readout(m, {0}, &bad), DataError);
}

TEST_CASE("aggregate_views: zero heterogeneity prompt is a plain sum") {
  const std::vector<std::vector<double>> r = {{1.0, 0.0}, {0.0, 1.0}, {2.0, 2.0}};
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  CHECK(aggregate_views(r, &zeros) == aggregate_views(r, nullptr));
  CHECK(aggregate_views(r, nullptr) == std::vector<double>{3.0, 3.0});
}

TEST_CASE("aggregate_views: hand-computed weighting") {
  // r0=[1,0], r1=[0,1], p_het=(1,-1) -> 2*[1,0] + 0*[0,1] = [2,0]
  const std::vector<std::vector<double>> r = {{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<double> p = {1.0, -1.0};
  CHECK(aggregate_views(r, &p) == std::vector<double>{2.0, 0.0});
}

TEST_CASE("aggregate_views: linear in each readout") {
  test_support::grad_rel_err(0, 0);  // keep helper referenced
  const std::vector<double> p = {0.5, -0.25};
  const std::vector<std::vector<double>> base = {{1.0, 2.0}, {3.0, -1.0}};
  std::vector<std::vector<double>> scaled = base;
  for (double& x : scaled[0]) x *= 3.0;
  const auto a = aggregate_views(base, &p);
  const auto b = aggregate_views(scaled, &p);
  // difference is (1 + p0) * 2 * r0
  CHECK(b[0] - a[0] == doctest::Approx((1.0 + p[0]) * 2.0 * base[0][0]).epsilon(1e-12));
  CHECK(b[1] - a[1] == doctest::Approx((1.0 + p[0]) * 2.0 * base[0][1]).epsilon(1e-12));
}

TEST_CASE("aggregate_views: eight types need nine weights") {
  std::vector<std::vector<double>> r(9, std::vector<double>{1.0});
  std::vector<double> p(9, 0.0);
  CHECK(aggregate_views(r, &p) == std::vector<double>{9.0});
  p.resize(8);
  CHECK_THROWS_AS(aggregate_views(r, &p), DataError);
}

TEST_CASE("cosine_sim: identities") {
  const std::vector<double> x = {0.3, -0.7, 2.0};
  CHECK(cosine_sim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {0.0, 5.0};
  CHECK(cosine_sim(a, b) == 0.0);
  const std::vector<double> c = {1.0, 1.0};
  CHECK(cosine_sim(a, c) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  const std::vector<double> zero = {0.0, 0.0};
  CHECK(cosine_sim(a, zero) == 0.0);
}

TEST_CASE("class_prototypes: means and error paths") {
  const std::vector<std::vector<double>> emb = {{0.0, 2.0}, {2.0, 0.0}, {5.0, 5.0}};
  const std::vector<int> labels = {0, 0, 1};
  const auto protos = class_prototypes(emb, labels, 2);
  CHECK(protos[0] == std::vector<double>{1.0, 1.0});
  CHECK(protos[1] == std::vector<double>{5.0, 5.0});

  // k = 1 -> prototype equals the single support embedding
  const auto single = class_prototypes({{0.5, -0.5}}, {0}, 1);
  CHECK(single[0] == std::vector<double>{0.5, -0.5});

  CHECK_THROWS_AS(class_prototypes(emb, labels, 3), DataError);  // class 2 empty
}

TEST_CASE("classify: argmax with deterministic tie-break") {
  const std::vector<double> query = {1.0, 0.0};
  CHECK(classify(query, {{1.0, 0.1}, {0.0, 1.0}}) == 0);
  CHECK(classify(query, {{0.0, 1.0}, {1.0, 0.1}}) == 1);
  // all prototypes identical -> lowest class id
  CHECK(classify(query, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}) == 0);
  // positive scaling of the query cannot change the decision
  const std::vector<double> scaled = {7.5, 0.0};
  CHECK(classify(scaled, {{1.0, 0.1}, {0.0, 1.0}}) == 0);
}

TEST_CASE("embed_instance: identity prompts reproduce the unprompted pipeline") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const HeteroGraph g = test_support::random_graph(seed, 16, 4, 3, 0.25, 4);
    const EncoderParams params = init_params(3, 6, 2, seed);
    const EncodedGraph enc = encode_graph(g, params, true);
    const PromptPair identity = PromptPair::identity(6, enc.num_views());

    const int center = static_cast<int>(seed) % g.num_nodes;
    const InstanceRows inst = instance_rows(enc, context_subgraph(g, center, 1).member_nodes);
    const InstanceEmbedding prompted = embed_instance(enc, inst, &identity);
    const InstanceEmbedding plain = embed_instance(enc, inst, nullptr);
    for (size_t j = 0; j < plain.s.size(); ++j) {
      CHECK(std::fabs(prompted.s[j] - plain.s[j]) <= 1e-12);
    }
  }
}

TEST_CASE("embed_instance: homogeneous single-node instance in plain mode") {
  const HeteroGraph g = test_support::random_graph(4, 8, 1, 3, 0.3, 3);
  const EncoderParams params = init_params(3, 5, 2, 11);
  const EncodedGraph enc = encode_graph(g, params, /*templated=*/false);
  const InstanceRows inst = instance_rows(enc, {2});
  const InstanceEmbedding e = embed_instance(enc, inst, nullptr);
  for (int j = 0; j < 5; ++j) CHECK(e.s[j] == enc.emb[0].at(2, j));
}

TEST_CASE("embed_instance: templated path on a homogeneous graph doubles the direct readout") {
  // views 0 and 1 coincide, so the sum aggregation yields twice the readout
  const HeteroGraph g = test_support::random_graph(6, 10, 1, 3, 0.3, 4);
  const EncoderParams params = init_params(3, 5, 2, 13);
  const EncodedGraph templated = encode_graph(g, params, true);
  const EncodedGraph plain = encode_graph(g, params, false);
  const auto members = context_subgraph(g, 1, 1).member_nodes;
  const InstanceEmbedding t = embed_instance(templated, instance_rows(templated, members), nullptr);
  const InstanceEmbedding p = embed_instance(plain, instance_rows(plain, members), nullptr);
  for (size_t j = 0; j < t.s.size(); ++j) {
    CHECK(t.s[j] == doctest::Approx(2.0 * p.s[j]).epsilon(1e-12));
  }
}

TEST_CASE("embed_instance: matches the explicit per-view template composition") {
  const HeteroGraph g = test_support::random_graph(15, 14, 3, 3, 0.3, 6);
  const EncoderParams params = init_params(3, 4, 2, 19);
  const EncodedGraph enc = encode_graph(g, params, true);
  const Subgraph sub = context_subgraph(g, 0, 1);

  PromptPair prompts = PromptPair::identity(4, enc.num_views());
  for (size_t i = 0; i < prompts.feat.size(); ++i) prompts.feat[i] = 0.5 + 0.25 * i;
  for (size_t i = 0; i < prompts.het.size(); ++i) prompts.het[i] = 0.1 * i - 0.2;

  const InstanceEmbedding got =
      embed_instance(enc, instance_rows(enc, sub.member_nodes), &prompts);

  // reference: build the subgraph views explicitly and pool per view
  const auto sub_views = build_subgraph_views(g, sub);
  std::vector<std::vector<double>> readouts;
  for (int i = 0; i < enc.num_views(); ++i) {
    std::vector<int> rows;
    for (int node : sub_views[i].member_nodes) rows.push_back(enc.node_row[i][node]);
    readouts.push_back(readout(enc.emb[i], rows, &prompts.feat));
  }
  const auto expect = aggregate_views(readouts, &prompts.het);
  for (size_t j = 0; j < expect.size(); ++j) {
    CHECK(got.s[j] == doctest::Approx(expect[j]).epsilon(1e-12));
  }
}

TEST_CASE("PromptPair: identity construction and parameter count") {
  const PromptPair p = PromptPair::identity(64, 5);
  CHECK(p.parameter_count() == 69);
  for (double x : p.feat) CHECK(x == 1.0);
  for (double x : p.het) CHECK(x == 0.0);
}
