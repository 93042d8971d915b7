#pragma once

#include "clarq/channel_mc.hpp"
#include "clarq/fbl.hpp"
#include "clarq/schedule.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace clarq {

/// Uniform SNR grid shared by both axes, in dB.
struct LutSpec {
  double snr_min_db = -20.0;
  double snr_max_db = 20.0;
  double step_db = 1.0;
  FblParams params;
  int n_max = 2500;
  /// Only store UL == DL points; lookups use the lower of the two indices.
  bool diagonal = false;

  void validate() const;
  int points() const;
  double grid_db(int index) const;
  /// Floor quantisation clamped to the grid.
  int index_of(double snr_db) const;
};

/// Pre-extracted schedules, row-major over (UL index, DL index) or one per
/// point on the diagonal.
struct Lut {
  LutSpec spec;
  std::vector<Schedule> entries;

  const Schedule& at(int ul_index, int dl_index) const;
};

Lut build_lut(const LutSpec& spec, int workers = 1);

/// Schedule of the nearest grid point at or below each measured SNR.
const Schedule& lookup(const Lut& lut, double ul_snr_db, double dl_snr_db);

/// "CLRQLUT1", little-endian spec header, then every entry as a u16 count
/// followed by that many u16 values: the UL slots and then the final DL slot.
void write_lut(std::ostream& out, const Lut& lut);
Lut read_lut(std::istream& in);
void write_lut_text(std::ostream& out, const Lut& lut);

struct ResolutionRow {
  double step_db = 0.0;  // 0 marks the exact (per-draw DP) reference
  double mean_loop_error = 0.0;
  std::vector<double> per_run_errors;
};

/// LUT campaigns on common draws for each step size, plus the exact
/// reference row last. The grids share an origin aligned to a multiple of
/// the coarsest step so finer grids refine coarser ones.
std::vector<ResolutionRow> resolution_experiment(const std::vector<double>& steps_db,
                                                 const FadingModel& model,
                                                 const FblParams& params, int n_max, int runs,
                                                 std::uint64_t seed, int workers = 1);

}  // namespace clarq
