#include <doctest.h>

#include <numeric>

#include "ndt/routing.hpp"
#include "ndt/testing.hpp"

using namespace ndt;

namespace {

Batch make_batch(std::size_t n, std::size_t d, Rng& rng) {
  Batch batch;
  batch.features = Tensor({n, d});
  testing::fill_uniform(batch.features, rng);
  batch.labels.resize(n);
  for (auto& l : batch.labels) l = static_cast<int>(rng.index(10));
  batch.positions.resize(n);
  std::iota(batch.positions.begin(), batch.positions.end(), std::size_t(0));
  return batch;
}

std::vector<std::uint8_t> random_mask(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = static_cast<std::uint8_t>(rng.index(2));
  return mask;
}

}  // namespace

TEST_SUITE_BEGIN("routing");

TEST_CASE("sub_batch splits ids 1..5 like the worked example") {
  // samples with ids 1,3,4 activated, 2,5 not
  Batch batch;
  batch.features = Tensor({5, 1}, {1, 2, 3, 4, 5});
  batch.labels = {1, 2, 3, 4, 5};
  batch.positions = {1, 2, 3, 4, 5};
  std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0};
  auto split = sub_batch(batch, mask);
  CHECK(split.left.positions == std::vector<std::size_t>{1, 3, 4});
  CHECK(split.right.positions == std::vector<std::size_t>{2, 5});
  CHECK(split.left.features(0, 0) == 1.0);
  CHECK(split.left.features(1, 0) == 3.0);
  CHECK(split.left.features(2, 0) == 4.0);
  CHECK(split.right.features(0, 0) == 2.0);
  CHECK(split.right.features(1, 0) == 5.0);
}

TEST_CASE("all-true mask gives left == batch and an empty right") {
  Rng rng(9);
  Batch batch = make_batch(6, 3, rng);
  std::vector<std::uint8_t> mask(6, 1);
  auto split = sub_batch(batch, mask);
  CHECK(split.left.size() == 6);
  CHECK(split.right.size() == 0);
  CHECK(split.right.features.rows() == 0);
  CHECK(split.right.features.cols() == 3);
  for (std::size_t i = 0; i < batch.features.size(); ++i) {
    CHECK(split.left.features[i] == batch.features[i]);
  }
}

TEST_CASE("every input row appears exactly once across the two outputs") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.index(32);
    Batch batch = make_batch(n, 2, rng);
    auto mask = random_mask(n, rng);
    auto split = sub_batch(batch, mask);
    CHECK(split.left.size() + split.right.size() == n);
    std::vector<int> seen(n, 0);
    for (std::size_t p : split.left.positions) seen[p] += 1;
    for (std::size_t p : split.right.positions) seen[p] += 1;
    for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == 1);
  }
}

TEST_CASE("sub_batch rejects a mask of the wrong length") {
  Rng rng(2);
  Batch batch = make_batch(4, 2, rng);
  CHECK_THROWS_AS(sub_batch(batch, std::vector<std::uint8_t>{1, 0}), DimensionError);
}

TEST_CASE("join inverts split bit-exactly on 1000 random cases") {
  Rng rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(24);
    const std::size_t d = 1 + rng.index(5);
    Batch batch = make_batch(n, d, rng);
    auto mask = random_mask(n, rng);
    auto split = sub_batch(batch, mask);
    Tensor joined = join_batch(split.left.features, split.right.features, split.record);
    REQUIRE(joined.same_shape(batch.features));
    for (std::size_t i = 0; i < joined.size(); ++i) {
      CHECK(joined[i] == batch.features[i]);  // bit-exact
    }
  }
}

TEST_CASE("two-row join follows the mask") {
  PartitionRecord rec = make_partition_record({1, 0});
  Tensor left({1, 1}, {1.0});
  Tensor right({1, 1}, {2.0});
  Tensor joined = join_batch(left, right, rec);
  CHECK(joined(0, 0) == 1.0);
  CHECK(joined(1, 0) == 2.0);
}

TEST_CASE("empty left joins to right in original order") {
  PartitionRecord rec = make_partition_record({0, 0, 0});
  Tensor left({0, 2});
  Tensor right({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor joined = join_batch(left, right, rec);
  for (std::size_t i = 0; i < right.size(); ++i) CHECK(joined[i] == right[i]);
}

TEST_CASE("join rejects row counts that disagree with the record") {
  PartitionRecord rec = make_partition_record({1, 0, 1});
  Tensor left({1, 2});
  Tensor right({1, 2});
  CHECK_THROWS_AS(join_batch(left, right, rec), DimensionError);
}

TEST_CASE("split_gradients routes rows back by membership") {
  PartitionRecord rec = make_partition_record({1, 0, 1});
  Tensor djoined({3, 2}, {1, 1, 1, 1, 1, 1});
  auto parts = split_gradients(djoined, rec);
  CHECK(parts.dleft.rows() == 2);
  CHECK(parts.dright.rows() == 1);
  for (std::size_t i = 0; i < parts.dleft.size(); ++i) CHECK(parts.dleft[i] == 1.0);
  for (std::size_t i = 0; i < parts.dright.size(); ++i) CHECK(parts.dright[i] == 1.0);
}

TEST_CASE("split_gradients is the exact inverse of the join permutation") {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(16);
    auto mask = random_mask(n, rng);
    PartitionRecord rec = make_partition_record(mask);
    Tensor dj({n, 3});
    testing::fill_uniform(dj, rng);
    auto parts = split_gradients(dj, rec);
    Tensor back = join_batch(parts.dleft, parts.dright, rec);
    // A pure permutation: every entry survives bit-exactly, so the total
    // accumulated in a fixed order is conserved exactly.
    double sum_in = 0.0, sum_out = 0.0;
    for (std::size_t i = 0; i < dj.size(); ++i) {
      CHECK(back[i] == dj[i]);
      sum_in += dj[i];
      sum_out += back[i];
    }
    CHECK(sum_in == sum_out);
  }
}

TEST_CASE("gradient scatter is the adjoint of the forward permutation") {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(16), d = 1 + rng.index(4);
    auto mask = random_mask(n, rng);
    PartitionRecord rec = make_partition_record(mask);
    // forward: (left, right) -> joined; u lives on the input side
    Tensor u_left({rec.left_index.size(), d}), u_right({rec.right_index.size(), d});
    testing::fill_uniform(u_left, rng);
    testing::fill_uniform(u_right, rng);
    Tensor v({n, d});
    testing::fill_uniform(v, rng);

    Tensor forward_u = join_batch(u_left, u_right, rec);
    auto back_v = split_gradients(v, rec);

    double lhs = 0.0;  // <forward(u), v>
    for (std::size_t i = 0; i < v.size(); ++i) lhs += forward_u[i] * v[i];
    double rhs = 0.0;  // <u, backward(v)>
    for (std::size_t i = 0; i < u_left.size(); ++i) rhs += u_left[i] * back_v.dleft[i];
    for (std::size_t i = 0; i < u_right.size(); ++i) rhs += u_right[i] * back_v.dright[i];
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("allocate_batch identity and swap links") {
  Tensor source({2, 2}, {1, 2, 3, 4});
  LinkRecord identity{{{0, 0}, {1, 1}}};
  Tensor same = allocate_batch(source, identity, 2);
  for (std::size_t i = 0; i < source.size(); ++i) CHECK(same[i] == source[i]);

  LinkRecord swap{{{1, 0}, {0, 1}}};
  Tensor swapped = allocate_batch(source, swap, 2);
  CHECK(swapped(0, 0) == 3.0);
  CHECK(swapped(0, 1) == 4.0);
  CHECK(swapped(1, 0) == 1.0);
  CHECK(swapped(1, 1) == 2.0);
}

TEST_CASE("unlinked destination rows stay zero") {
  Tensor source({1, 2}, {5, 6});
  LinkRecord links{{{0, 2}}};
  Tensor out = allocate_batch(source, links, 4);
  CHECK(out(2, 0) == 5.0);
  CHECK(out(2, 1) == 6.0);
  for (std::size_t r : {std::size_t(0), std::size_t(1), std::size_t(3)}) {
    CHECK(out(r, 0) == 0.0);
    CHECK(out(r, 1) == 0.0);
  }
}

TEST_CASE("duplicated source accumulates both gradient rows in backward") {
  Tensor source({2, 1}, {7.0, 8.0});
  LinkRecord fanout{{{0, 0}, {0, 1}}};
  Tensor out = allocate_batch(source, fanout, 2);
  CHECK(out(0, 0) == 7.0);
  CHECK(out(1, 0) == 7.0);
  Tensor dout({2, 1}, {0.5, 0.25});
  Tensor dsource = allocate_batch_backward(dout, fanout, 2);
  CHECK(dsource(0, 0) == 0.75);
  CHECK(dsource(1, 0) == 0.0);
}

TEST_CASE("allocate_batch backward is the adjoint of the gather") {
  Rng rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t src_rows = 1 + rng.index(8), d = 1 + rng.index(4);
    const std::size_t out_rows = 1 + rng.index(8);
    LinkRecord links;
    std::vector<std::size_t> dests(out_rows);
    std::iota(dests.begin(), dests.end(), std::size_t(0));
    Rng shuffle_rng(trial);
    shuffle_rng.shuffle(dests);
    const std::size_t n_links = rng.index(out_rows + 1);
    for (std::size_t i = 0; i < n_links; ++i) {
      links.links.emplace_back(rng.index(src_rows), dests[i]);
    }
    Tensor u({src_rows, d}), v({out_rows, d});
    testing::fill_uniform(u, rng);
    testing::fill_uniform(v, rng);
    Tensor fu = allocate_batch(u, links, out_rows);
    Tensor bv = allocate_batch_backward(v, links, src_rows);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < fu.size(); ++i) lhs += fu[i] * v[i];
    for (std::size_t i = 0; i < u.size(); ++i) rhs += u[i] * bv[i];
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("out-of-range links name the offending pair") {
  Tensor source({2, 1}, {1, 2});
  LinkRecord bad{{{5, 0}}};
  CHECK_THROWS_WITH_AS(allocate_batch(source, bad, 2), doctest::Contains("(5, 0)"), IndexError);
  LinkRecord bad_dest{{{0, 9}}};
  CHECK_THROWS_WITH_AS(allocate_batch(source, bad_dest, 2), doctest::Contains("(0, 9)"), IndexError);
  LinkRecord dup{{{0, 1}, {1, 1}}};
  CHECK_THROWS_AS(allocate_batch(source, dup, 2), IndexError);
}

TEST_SUITE_END();
