#pragma once

// Finite-blocklength link model: channel quantities, normal-approximation
// packet error rates and the minimal slot length for a target error rate.

#include <span>
#include <vector>

namespace clarq {

/// Per-direction AWGN link. Stores the linear SNR together with the derived
/// Shannon capacity (bits/symbol) and channel dispersion.
struct ChannelSpec {
  double snr_linear = 0.0;
  double capacity = 0.0;
  double dispersion = 0.0;

  /// Complex-AWGN channel at the given linear SNR (must be > 0).
  static ChannelSpec from_linear(double snr_linear);
  static ChannelSpec from_db(double snr_db);
  /// Capacity from the SNR, dispersion injected as data (non-Gaussian models).
  static ChannelSpec with_dispersion(double snr_linear, double dispersion);

  double snr_db() const;
  /// Same channel with its transmit power scaled by `factor`.
  ChannelSpec scaled(double factor) const;

  bool operator==(const ChannelSpec&) const = default;
};

struct FblParams {
  int packet_bits = 16;
  double eps_max = 0.2;

  void validate() const;
};

/// Frame timing in seconds.
struct FrameBudget {
  double frame_time = 10e-3;
  double symbol_time = 4e-6;
  double feedback_time = 0.0;

  void validate() const;
  /// floor(frame_time / symbol_time).
  int n_max() const;
  /// Symbols reserved per ACK/NACK exchange, ceil(feedback_time / symbol_time).
  int feedback_symbols() const;
};

double db_to_linear(double db);
double linear_to_db(double linear);

/// Gaussian tail probability Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);
/// Inverse of q_function on (0, 1); throws std::domain_error outside.
double q_inverse(double p);
/// Closed-form approximation of Q(x) for x >= 0 (Borjesson-Sundberg). Kept for
/// comparison only; all model code uses q_function.
double q_function_approx(double x);

/// Normal-approximation error rate of a d-bit packet sent over n symbols.
double packet_error_rate(const ChannelSpec& ch, int n, int packet_bits);

/// Type-II (incremental redundancy) error after all attempts so far, evaluated
/// at the cumulative blocklength.
double harq2_error_rate(const ChannelSpec& ch, int cumulative_n, int packet_bits);
double harq2_error_rate(const ChannelSpec& ch, std::span<const int> attempts, int packet_bits);

/// Combined error of independent attempts, folded as e <- e + e_i - e * e_i.
double combined_arq_error(std::span<const double> attempt_errors);

/// Returned by min_blocklength for links too weak to ever reach eps_max
/// within any practical frame.
inline constexpr int kBlocklengthCap = 1 << 30;

/// Smallest n with packet_error_rate(ch, n, d) <= eps_max, saturating at
/// kBlocklengthCap.
int min_blocklength(const ChannelSpec& ch, const FblParams& params);
/// Real-valued root of packet_error_rate(n) == eps_max from the closed form.
double min_blocklength_real(const ChannelSpec& ch, const FblParams& params);

/// Error rates for every blocklength 0..n_max (entry 0 is 1.0).
std::vector<double> error_table(const ChannelSpec& ch, int packet_bits, int n_max);

}  // namespace clarq
