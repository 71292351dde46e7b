#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cfx/align.hpp"
#include "cfx/rpeaks.hpp"
#include "cfx/sparsify.hpp"
#include "cfx/synthetic.hpp"
#include "support.hpp"

using namespace cfx;

namespace {

Series impulses(const std::string& id, int t, const std::vector<int>& where, float amp) {
  Series s = cfxtest::filled(id, t, 1, 0.f);
  for (int w : where) s.at(w, 0) = amp;
  return s;
}

}  // namespace

TEST_CASE("detect_rpeaks") {
  SUBCASE("zero signal has no peaks") {
    Series z = cfxtest::filled("z", 200, 1, 0.f);
    CHECK(detect_rpeaks(z, 0).empty());
  }

  SUBCASE("clean impulses are found exactly") {
    Series s = impulses("imp", 600, {100, 300, 500}, 10.f);
    RPeaks p = detect_rpeaks(s, 0);
    CHECK(p.indices == std::vector<int>{100, 300, 500});
  }

  SUBCASE("refractory gap keeps only the larger of two close peaks") {
    Series s = impulses("close", 200, {50}, 4.f);
    s.at(55, 0) = 6.f;  // 5 samples apart, same refractory window (20 @ 100Hz)
    RPeaks p = detect_rpeaks(s, 0);
    CHECK(p.indices == std::vector<int>{55});
  }

  SUBCASE("boundary samples are never peaks") {
    Series s = cfxtest::filled("edge", 50, 1, 0.f);
    s.at(0, 0) = 10.f;
    s.at(49, 0) = 10.f;
    CHECK(detect_rpeaks(s, 0).empty());
  }

  SUBCASE("auto detection falls back to the widest-range lead") {
    // Lead 1 (default for C>=2) is flat; lead 0 carries the beats.
    Series s = cfxtest::filled("multi", 300, 2, 0.f);
    for (int w : {60, 160, 260}) s.at(w, 0) = 8.f;
    CHECK(default_rpeak_lead(s) == 1);
    RPeaks p = detect_rpeaks_auto(s);
    CHECK(p.indices == std::vector<int>{60, 160, 260});
  }
}

TEST_CASE("beat trains expose detectable peaks") {
  Series bt = make_beat_train("bt", 500, 2, 0, 80, 30, 10.0, 0.05, 42);
  RPeaks p = detect_rpeaks(bt, 0);
  REQUIRE(p.size() >= 5);
  // Peaks sit on the configured grid: phase + k*period.
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK((p.indices[i] - 30) % 80 == 0);
}

TEST_CASE("normalize_peak_count") {
  SUBCASE("equal counts pass through untouched") {
    Series proto = impulses("p", 300, {50, 150, 250}, 9.f);
    RPeaks pp = detect_rpeaks(proto, 0);
    RPeaks qp;
    qp.indices = {40, 160, 280};
    auto [norm, peaks] = normalize_peak_count(proto, pp, qp);
    CHECK(norm.values == proto.values);
    CHECK(peaks.indices == pp.indices);
  }

  SUBCASE("surplus prototype beats are trimmed from the front") {
    Series proto = impulses("p", 400, {50, 150, 250, 350}, 9.f);
    RPeaks pp = detect_rpeaks(proto, 0);
    RPeaks qp;
    qp.indices = {100, 300};  // query has only 2 beats
    auto [norm, peaks] = normalize_peak_count(proto, pp, qp);
    REQUIRE(peaks.size() == 2);
    CHECK(norm.t < proto.t);
    // The kept peaks are the last two, re-based and still interior maxima.
    RPeaks redetected = detect_rpeaks(norm, 0);
    CHECK(redetected.indices == peaks.indices);
    CHECK(peaks.indices[0] > 0);
  }

  SUBCASE("missing prototype beats are compensated with leading zeros") {
    Series proto = impulses("p", 300, {100, 220}, 9.f);
    RPeaks pp = detect_rpeaks(proto, 0);
    RPeaks qp;
    qp.indices = {30, 130, 260};  // query has 3 beats
    auto [norm, peaks] = normalize_peak_count(proto, pp, qp);
    CHECK(norm.t == proto.t);  // grown axis is right-cropped back to T
    REQUIRE(peaks.size() == 2);
    // Content shifted right by the prepended-zero count; start is silent.
    CHECK(peaks.indices[0] > pp.indices[0]);
    CHECK(norm.at(0, 0) == 0.f);
  }
}

TEST_CASE("align_prototype") {
  SUBCASE("self-alignment is bit-exact") {
    Series q = make_beat_train("bt", 500, 4, 0, 80, 30, 10.0, 0.1, 7);
    Series out = align_prototype(q, q);
    CHECK(out.values == q.values);
  }

  SUBCASE("aligned peaks land exactly on query peaks") {
    Series proto = impulses("p", 400, {100, 300}, 9.f);
    Series query = impulses("q", 400, {120, 320}, 7.f);
    RPeaks pp = detect_rpeaks(proto, 0);
    RPeaks qp = detect_rpeaks(query, 0);
    REQUIRE(pp.size() == 2);
    REQUIRE(qp.size() == 2);
    Series aligned = align_prototype(proto, pp, query, qp);
    CHECK(aligned.t == query.t);
    RPeaks ap = detect_rpeaks(aligned, 0);
    CHECK(ap.indices == std::vector<int>{120, 320});
    // The donor's amplitude travels with the peak.
    CHECK(aligned.at(120, 0) == 9.f);
    CHECK(aligned.at(320, 0) == 9.f);
  }

  SUBCASE("adjacent peaks degrade to sample copies without interpolation") {
    Series proto = impulses("p", 50, {10, 30}, 9.f);
    Series query = impulses("q", 50, {20, 21}, 7.f);
    RPeaks pp = detect_rpeaks(proto, 0);
    RPeaks qp;
    qp.indices = {20, 21};  // adjacent query beats
    Series aligned = align_prototype(proto, pp, query, qp);
    CHECK(aligned.at(20, 0) == 9.f);
    CHECK(aligned.at(21, 0) == 9.f);  // single-sample segment copied, not blended
  }

  SUBCASE("alignment without any peaks is unavailable") {
    Series flat_p = cfxtest::filled("p", 60, 1, 0.f);
    Series flat_q = cfxtest::filled("q", 60, 1, 0.f);
    CHECK_THROWS_AS(align_prototype(flat_p, flat_q), AlignmentUnavailable);
  }

  SUBCASE("different beat counts still produce query-shaped output") {
    // Beats sit on lead 1 so the auto-detection inside the convenience
    // overload looks at the spiking lead, as with real lead-II ECGs.
    Series proto = make_beat_train("p", 500, 2, 1, 95, 40, 9.0, 0.05, 3);
    Series query = make_beat_train("q", 500, 2, 1, 70, 20, 11.0, 0.05, 4);
    Series aligned = align_prototype(proto, query);
    CHECK(aligned.t == query.t);
    CHECK(aligned.c == query.c);
    RPeaks pp = detect_rpeaks(proto, 1);
    RPeaks qp = detect_rpeaks(query, 1);
    RPeaks ap = detect_rpeaks(aligned, 1);
    // The aligner pairs the last min(p,q) beats; each matched query peak
    // must carry a detected peak in the aligned output. Earlier query beats
    // have no prototype counterpart and stay flat.
    std::size_t m = std::min(pp.size(), qp.size());
    REQUIRE(m >= 2);
    for (std::size_t k = qp.size() - m; k < qp.size(); ++k)
      CHECK(std::find(ap.indices.begin(), ap.indices.end(), qp.indices[k]) != ap.indices.end());
    // And nothing spurious: every detected aligned peak sits on a query peak.
    for (int a : ap.indices)
      CHECK(std::find(qp.indices.begin(), qp.indices.end(), a) != qp.indices.end());
  }
}

TEST_CASE("importance_scores weight peak neighborhoods") {
  SUBCASE("identical series scores zero everywhere") {
    Series q = make_beat_train("q", 200, 2, 0, 60, 20, 8.0, 0.05, 5);
    RPeaks qp = detect_rpeaks(q, 0);
    auto scores = importance_scores(q, q, qp, {});
    for (double s : scores) CHECK(s == 0.0);
  }

  SUBCASE("unit difference at a peak carries rpeak_weight times the off-peak score") {
    Series q = cfxtest::filled("q", 100, 1, 0.f);
    q.at(50, 0) = 10.f;  // single peak at 50
    RPeaks qp = detect_rpeaks(q, 0);
    REQUIRE(qp.indices == std::vector<int>{50});

    Series donor = q;
    donor.at(50, 0) += 1.f;  // unit difference on the peak
    donor.at(10, 0) += 1.f;  // unit difference far from it
    SparsifyConfig cfg;
    auto scores = importance_scores(q, donor, qp, cfg);
    CHECK(scores[50] == doctest::Approx(cfg.rpeak_weight * scores[10]));
    CHECK(scores[10] == doctest::Approx(1.0));
  }

  SUBCASE("no detected peaks degrades to plain absolute difference") {
    Series q = cfxtest::filled("q", 40, 1, 1.f);
    Series donor = cfxtest::filled("d", 40, 1, 3.5f);
    RPeaks none;
    auto scores = importance_scores(q, donor, none, {});
    for (double s : scores) CHECK(s == doctest::Approx(2.5));
  }
}
