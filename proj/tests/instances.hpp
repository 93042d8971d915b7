#pragma once

// Seeded random instance generators shared by the unit tests and the
// acceptance binary.

#include "clarq/fbl.hpp"
#include "clarq/rng.hpp"
#include "clarq/schedule.hpp"

#include <algorithm>

namespace inst {

inline const clarq::ChannelSpec kScenarioA = clarq::ChannelSpec::from_linear(0.05);
inline const clarq::ChannelSpec kScenarioBUl = clarq::ChannelSpec::from_linear(0.07);
inline const clarq::ChannelSpec kScenarioBDl = clarq::ChannelSpec::from_linear(0.03);

struct Instance {
  clarq::ChannelSpec ul;
  clarq::ChannelSpec dl;
  clarq::FblParams params;
  int n_max = 0;
  int n_min_ul = 0;
  int n_min_dl = 0;
  bool symmetric = false;
};

// Small instances the exhaustive enumeration can still cover: n_min of both
// links in [3, 12] and n_max <= min(200, 8 max(n_min)). Every other instance
// shares one SNR between the links.
inline Instance toy(clarq::Xoshiro256& rng) {
  for (;;) {
    Instance in;
    in.symmetric = rng() % 2 == 0;
    const double gu = -8.0 + 11.0 * rng.uniform();
    const double gd = in.symmetric ? gu : -8.0 + 11.0 * rng.uniform();
    in.params.packet_bits = 1 + static_cast<int>(rng() % 4);
    in.ul = clarq::ChannelSpec::from_db(gu);
    in.dl = clarq::ChannelSpec::from_db(gd);
    in.n_min_ul = clarq::min_blocklength(in.ul, in.params);
    in.n_min_dl = clarq::min_blocklength(in.dl, in.params);
    if (in.n_min_ul < 3 || in.n_min_ul > 12 || in.n_min_dl < 3 || in.n_min_dl > 12) continue;
    const int lo = in.n_min_ul + in.n_min_dl;
    const int hi = std::min(200, 8 * std::max(in.n_min_ul, in.n_min_dl));
    in.n_max = lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    return in;
  }
}

// Feasible instances for the structural checks: SNR in [-15, 5] dB, packet
// size in [8, 64] bits, n_max up to min(3000, 8 max(n_min)).
inline Instance structural(clarq::Xoshiro256& rng, bool symmetric) {
  for (;;) {
    Instance in;
    in.symmetric = symmetric;
    const double gu = -15.0 + 20.0 * rng.uniform();
    const double gd = symmetric ? gu : -15.0 + 20.0 * rng.uniform();
    in.params.packet_bits = 8 + static_cast<int>(rng() % 57);
    in.ul = clarq::ChannelSpec::from_db(gu);
    in.dl = clarq::ChannelSpec::from_db(gd);
    in.n_min_ul = clarq::min_blocklength(in.ul, in.params);
    in.n_min_dl = clarq::min_blocklength(in.dl, in.params);
    const int lo = in.n_min_ul + in.n_min_dl;
    const int hi = std::min(3000, 8 * std::max(in.n_min_ul, in.n_min_dl));
    if (hi < lo) continue;
    in.n_max = lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    return in;
  }
}

inline clarq::LinkModel link_of(const Instance& in) {
  return clarq::LinkModel::from_channels(in.ul, in.dl, in.params, in.n_max);
}

}  // namespace inst
