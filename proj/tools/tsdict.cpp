// tsdict: batch command-line surface for the dictionary-based similarity
// join library. Subcommands cover the full pipeline: profile computation,
// dictionary learning, approximate joins, anomaly detection, benchmarking,
// and synthetic data generation for walkthroughs.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
// malformed input files), 3 numerical/contract error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsdict/tsdict.hpp"

namespace {

int exit_code_for(tsdict::errc c) {
  switch (c) {
  case tsdict::errc::parse_error:
  case tsdict::errc::version_error:
  case tsdict::errc::schema_error:
  case tsdict::errc::non_finite_input:
  case tsdict::errc::io_error:
    return 2;
  default:
    return 3;
  }
}

void emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  tsdict::detail::spill(path, content);
}

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

// ------------------------------------------------------------ subcommands

struct SelfJoinArgs {
  std::string series;
  std::size_t m = 0;
  unsigned threads = 0;
  std::string out = "-";
};

void run_self_join(const SelfJoinArgs& a) {
  const tsdict::TimeSeries T = tsdict::read_series(a.series);
  std::cerr << "self-join: n=" << T.n() << " m=" << a.m << '\n';
  emit(a.out, tsdict::format_profile(tsdict::self_join(T, a.m, a.threads)));
}

struct LearnArgs {
  std::string series;
  std::size_t m = 0;
  double k = 1.5;
  std::optional<double> space_saving;
  std::optional<std::uint64_t> sample_budget;
  std::optional<double> error_target;
  std::uint64_t max_iterations = tsdict::LearnConfig{}.max_iterations;
  unsigned threads = 0;
  std::string out = "-";
};

void run_learn(const LearnArgs& a) {
  const tsdict::TimeSeries T = tsdict::read_series(a.series);
  tsdict::LearnConfig cfg;
  cfg.m = a.m;
  cfg.k = a.k;
  cfg.space_saving_target = a.space_saving;
  cfg.sample_budget = a.sample_budget;
  cfg.error_target = a.error_target;
  cfg.max_iterations = a.max_iterations;
  const tsdict::Dictionary D = tsdict::learn_dictionary(T, cfg, a.threads);
  if (D.no_progress) {
    std::cerr << "note: learning stopped before reaching the requested target; no remaining window "
                 "improves the dictionary (stored coverage is written as-is)\n";
  }
  std::cerr << "learn: segments=" << D.segments.size() << " space_saving=" << D.space_saving
            << " e_max=" << (D.e_max ? *D.e_max : -1.0) << '\n';
  emit(a.out, tsdict::format_dictionary(D));
}

struct JoinArgs {
  std::string series;
  std::string dict;
  std::optional<std::size_t> m;
  unsigned threads = 0;
  std::string out = "-";
};

void run_join(const JoinArgs& a) {
  const tsdict::TimeSeries A = tsdict::read_series(a.series);
  const tsdict::Dictionary D = tsdict::read_dictionary(a.dict);
  const std::size_t m = a.m ? *a.m : D.m;
  emit(a.out, tsdict::format_profile(tsdict::join_dictionary(A, D, m, a.threads)));
}

struct ExactJoinArgs {
  std::string series_a;
  std::string series_b;
  std::size_t m = 0;
  unsigned threads = 0;
  std::string out = "-";
};

void run_exact_join(const ExactJoinArgs& a) {
  const tsdict::TimeSeries A = tsdict::read_series(a.series_a);
  const tsdict::TimeSeries B = tsdict::read_series(a.series_b);
  emit(a.out, tsdict::format_profile(tsdict::ab_join(A, B, a.m, a.threads)));
}

struct DetectArgs {
  std::string series;
  std::string dict;
  std::string labels;
  std::optional<std::size_t> m;
  std::size_t top_k = 1;
  unsigned threads = 0;
  std::string out = "-";
};

void run_detect(const DetectArgs& a) {
  const tsdict::TimeSeries A = tsdict::read_series(a.series);
  const tsdict::Dictionary D = tsdict::read_dictionary(a.dict);
  const std::size_t m = a.m ? *a.m : D.m;
  if (!D.e_max) {
    throw tsdict::error(tsdict::errc::invalid_argument,
                        "dictionary carries no e_max bound; detection needs one for certification");
  }
  const tsdict::AnomalyReport rep =
      tsdict::make_anomaly_report(tsdict::join_dictionary(A, D, m, a.threads), *D.e_max, a.top_k);

  std::string out = "# m=" + std::to_string(m) + " e_max=" + tsdict::detail::format_double(rep.e_max_used) +
                    " top_k=" + std::to_string(a.top_k) + "\n";
  out += "rank\twindow_start\tscore\tcertified\n";
  for (std::size_t r = 0; r < rep.discords.size(); ++r) {
    out += std::to_string(r + 1);
    out += '\t';
    out += std::to_string(rep.discords[r].start);
    out += '\t';
    out += tsdict::detail::format_double(rep.discords[r].score);
    out += '\t';
    out += yes_no(rep.discords[r].certified);
    out += '\n';
  }

  if (!a.labels.empty()) {
    const auto regions = tsdict::read_labels(a.labels);
    for (const auto& r : regions) {
      if (r.second > A.n()) {
        throw tsdict::error(tsdict::errc::schema_error,
                            "label region [" + std::to_string(r.first) + ", " + std::to_string(r.second) +
                                ") lies beyond the series (n=" + std::to_string(A.n()) + ")");
      }
    }
    const auto lab = tsdict::window_labels(regions, A.n(), m);
    out += "# auc=" + tsdict::detail::format_double(tsdict::auc_score(rep.scores.values, lab)) + "\n";
  }
  emit(a.out, out);
}

struct BenchArgs {
  std::string series_a;
  std::string series_b;
  std::size_t m = 0;
  std::vector<double> savings;
  double k = 1.5;
  std::uint64_t seed = 0; // reserved: every stage of the benchmark is deterministic
  unsigned threads = 0;
  std::string out = "-";
};

void run_bench(const BenchArgs& a) {
  (void)a.seed;
  const tsdict::TimeSeries A = tsdict::read_series(a.series_a);
  const tsdict::TimeSeries B = tsdict::read_series(a.series_b);

  tsdict::MatrixProfile exact;
  const double exact_seconds = timed([&] { exact = tsdict::ab_join(A, B, a.m, a.threads); });
  std::cerr << "bench: exact join took " << exact_seconds << " s\n";

  tsdict::MatrixProfile P_B;
  const double self_seconds = timed([&] { P_B = tsdict::self_join(B, a.m, a.threads); });
  std::cerr << "bench: self-join of the source took " << self_seconds
            << " s (computed once, shared by every row)\n";

  std::string out = "# m=" + std::to_string(a.m) + " n_a=" + std::to_string(A.n()) +
                    " n_b=" + std::to_string(B.n()) + "\n";
  out += "space_saving\te_max\tmean_err\tmax_err\tlearn_seconds\tjoin_seconds\texact_join_seconds\tspeedup\n";

  for (double s : a.savings) {
    tsdict::LearnConfig cfg;
    cfg.m = a.m;
    cfg.k = a.k;
    cfg.space_saving_target = s;
    tsdict::Dictionary D;
    const double learn_seconds = timed([&] { D = tsdict::learn_dictionary(B, cfg, P_B, a.threads); });
    tsdict::MatrixProfile approx;
    // the join is deterministic, so repeat the cheap runs and keep the best
    // time; otherwise the fast rows of the table are mostly scheduler noise
    double join_seconds = timed([&] { approx = tsdict::join_dictionary(A, D, a.m, a.threads); });
    double join_spent = join_seconds;
    int join_reps = 1;
    while (join_spent < 0.5 && join_reps < 5) {
      const double again = timed([&] { approx = tsdict::join_dictionary(A, D, a.m, a.threads); });
      join_seconds = std::min(join_seconds, again);
      join_spent += again;
      ++join_reps;
    }
    if (join_seconds <= 0.0) join_seconds = 1e-9;

    double mean_err = 0.0;
    double max_err = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
      if (!std::isfinite(exact.values[i]) || !std::isfinite(approx.values[i])) continue;
      const double err = approx.values[i] - exact.values[i];
      mean_err += err;
      max_err = std::max(max_err, err);
      ++counted;
    }
    if (counted > 0) mean_err /= static_cast<double>(counted);

    out += tsdict::detail::format_double(s);
    out += '\t';
    out += tsdict::detail::format_double(D.e_max ? *D.e_max : 0.0);
    out += '\t';
    out += tsdict::detail::format_double(mean_err);
    out += '\t';
    out += tsdict::detail::format_double(max_err);
    out += '\t';
    out += tsdict::detail::format_double(learn_seconds);
    out += '\t';
    out += tsdict::detail::format_double(join_seconds);
    out += '\t';
    out += tsdict::detail::format_double(exact_seconds);
    out += '\t';
    out += tsdict::detail::format_double(exact_seconds / join_seconds);
    out += '\n';
    std::cerr << "bench: space_saving=" << s << " done (learn " << learn_seconds << " s, join "
              << join_seconds << " s best of " << join_reps << ")\n";
  }
  emit(a.out, out);
}

struct GenArgs {
  std::string kind = "walk";
  std::size_t n = 4096;
  std::size_t beats = 60;
  std::size_t m = 100;
  double noise_sd = 0.02;
  double amp_jitter = 0.02;
  std::size_t anomaly_count = 0;
  std::string labels_out;
  std::uint64_t seed = 0;
  bool binary = false;
  std::string out = "-";
};

std::vector<double> gen_ecg_beat(std::size_t m) {
  std::vector<double> b(m, 0.0);
  auto bump = [&](double c, double w, double a) {
    for (std::size_t i = 0; i < m; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(m);
      b[i] += a * std::exp(-(t - c) * (t - c) / (2.0 * w * w));
    }
  };
  bump(0.2, 0.025, 0.25);
  bump(0.45, 0.008, -0.35);
  bump(0.5, 0.012, 1.6);
  bump(0.55, 0.008, -0.3);
  bump(0.75, 0.04, 0.45);
  return b;
}

void run_gen(const GenArgs& a) {
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  tsdict::TimeSeries T;

  if (a.kind == "walk") {
    double s = 0.0;
    T.values.reserve(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
      s += g(rng);
      T.values.push_back(s);
    }
  } else if (a.kind == "noise") {
    T.values.reserve(a.n);
    for (std::size_t i = 0; i < a.n; ++i) T.values.push_back(g(rng));
  } else { // ecg
    if (a.beats < 12 && a.anomaly_count > 0) {
      throw tsdict::error(tsdict::errc::invalid_argument, "need at least 12 beats to place anomalies");
    }
    std::set<std::size_t> anomalous;
    while (anomalous.size() < a.anomaly_count) {
      anomalous.insert(5 + rng() % (a.beats - 10));
    }
    const std::vector<double> beat = gen_ecg_beat(a.m);
    double peak = 0.0;
    for (double v : beat) peak = std::max(peak, v);
    T.values.reserve(a.beats * a.m);
    for (std::size_t bi = 0; bi < a.beats; ++bi) {
      const double amp = 1.0 + a.amp_jitter * g(rng);
      for (std::size_t i = 0; i < a.m; ++i) {
        double v = amp * beat[i];
        if (anomalous.count(bi)) {
          const double t = static_cast<double>(i) / static_cast<double>(a.m);
          v -= 0.9 * peak * std::exp(-(t - 0.5) * (t - 0.5) / (2.0 * 0.012 * 0.012));
        }
        T.values.push_back(v);
      }
    }
    for (auto& v : T.values) v += a.noise_sd * g(rng);
    if (!a.labels_out.empty()) {
      std::vector<tsdict::interval> regions;
      for (std::size_t bi : anomalous) regions.emplace_back(bi * a.m, (bi + 1) * a.m);
      tsdict::write_labels(a.labels_out, regions);
    }
  }

  std::cerr << "gen: kind=" << a.kind << " n=" << T.n() << " seed=" << a.seed << '\n';
  emit(a.out, a.binary ? tsdict::format_series_binary(T) : tsdict::format_series_text(T));
}

void add_common(CLI::App* sub, unsigned& threads, std::string& out) {
  sub->add_option("-o,--output", out, "output path ('-' writes to standard output)");
  sub->add_option("--threads", threads, "worker threads (0 picks a sensible default)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dictionary-based similarity joins for time series"};
  app.require_subcommand(1);
  const auto m_range = CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max());

  SelfJoinArgs sj;
  auto* c_sj = app.add_subcommand("self-join", "matrix profile of a series joined with itself");
  c_sj->add_option("series", sj.series, "input series file")->required();
  c_sj->add_option("-m,--window", sj.m, "window length")->required()->check(m_range);
  add_common(c_sj, sj.threads, sj.out);
  c_sj->callback([&] { run_self_join(sj); });

  LearnArgs le;
  auto* c_le = app.add_subcommand("learn", "learn a dictionary from a source series");
  c_le->add_option("series", le.series, "source series file")->required();
  c_le->add_option("-m,--window", le.m, "window length")->required()->check(m_range);
  c_le->add_option("-k,--context", le.k, "context factor: samples kept per pick are (1+k)*m");
  auto* stop = c_le->add_option_group("stop rule", "exactly one stopping rule");
  stop->add_option("--space-saving", le.space_saving, "stop once 1 - stored/n falls to this value");
  stop->add_option("--sample-budget", le.sample_budget, "stop before stored samples exceed this budget");
  stop->add_option("--error-target", le.error_target, "stop once the max-error bound reaches this value");
  stop->require_option(1);
  c_le->add_option("--max-iterations", le.max_iterations, "safety cap on greedy iterations");
  add_common(c_le, le.threads, le.out);
  c_le->callback([&] { run_learn(le); });

  JoinArgs jo;
  auto* c_jo = app.add_subcommand("join", "approximate join of a series against a dictionary");
  c_jo->add_option("series", jo.series, "query series file")->required();
  c_jo->add_option("dictionary", jo.dict, "dictionary file")->required();
  c_jo->add_option("-m,--window", jo.m, "window length (defaults to the dictionary's)")->check(m_range);
  add_common(c_jo, jo.threads, jo.out);
  c_jo->callback([&] { run_join(jo); });

  ExactJoinArgs ex;
  auto* c_ex = app.add_subcommand("exact-join", "exact join of one series against another");
  c_ex->add_option("series_a", ex.series_a, "query series file")->required();
  c_ex->add_option("series_b", ex.series_b, "reference series file")->required();
  c_ex->add_option("-m,--window", ex.m, "window length")->required()->check(m_range);
  add_common(c_ex, ex.threads, ex.out);
  c_ex->callback([&] { run_exact_join(ex); });

  DetectArgs de;
  auto* c_de = app.add_subcommand("detect", "rank discords of a series against a dictionary");
  c_de->add_option("series", de.series, "query series file")->required();
  c_de->add_option("dictionary", de.dict, "dictionary file")->required();
  c_de->add_option("-m,--window", de.m, "window length (defaults to the dictionary's)")->check(m_range);
  c_de->add_option("--top-k", de.top_k, "number of discords to report")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  c_de->add_option("--labels", de.labels, "ground-truth anomalous regions; adds an AUC line");
  add_common(c_de, de.threads, de.out);
  c_de->callback([&] { run_detect(de); });

  BenchArgs be;
  auto* c_be = app.add_subcommand("bench", "sweep space savings and tabulate error and runtime");
  c_be->add_option("series_a", be.series_a, "query series file")->required();
  c_be->add_option("series_b", be.series_b, "reference series file")->required();
  c_be->add_option("-m,--window", be.m, "window length")->required()->check(m_range);
  c_be->add_option("--savings", be.savings, "comma-separated space savings to sweep")
      ->required()
      ->delimiter(',');
  c_be->add_option("-k,--context", be.k, "context factor passed to learning");
  c_be->add_option("--seed", be.seed, "experiment seed (recorded for reproducibility)");
  add_common(c_be, be.threads, be.out);
  c_be->callback([&] { run_bench(be); });

  GenArgs ge;
  auto* c_ge = app.add_subcommand("gen", "generate a synthetic series for walkthroughs");
  c_ge->add_option("--kind", ge.kind, "walk, noise, or ecg")
      ->check(CLI::IsMember({"walk", "noise", "ecg"}));
  c_ge->add_option("-n,--samples", ge.n, "sample count (walk and noise)");
  c_ge->add_option("--beats", ge.beats, "beat count (ecg)");
  c_ge->add_option("-m,--beat-length", ge.m, "samples per beat (ecg)")->check(m_range);
  c_ge->add_option("--noise-sd", ge.noise_sd, "additive noise level (ecg)");
  c_ge->add_option("--amp-jitter", ge.amp_jitter, "per-beat amplitude jitter (ecg)");
  c_ge->add_option("--anomaly-count", ge.anomaly_count, "anomalous beats to plant (ecg)");
  c_ge->add_option("--labels-out", ge.labels_out, "write planted anomaly regions here (ecg)");
  c_ge->add_option("--seed", ge.seed, "generator seed");
  c_ge->add_flag("--binary", ge.binary, "write the binary series form");
  c_ge->add_option("-o,--output", ge.out, "output path, or - for standard output");
  c_ge->callback([&] {
    if (!ge.labels_out.empty() && (ge.kind != "ecg" || ge.anomaly_count == 0)) {
      throw CLI::ValidationError("--labels-out", "needs --kind ecg and --anomaly-count >= 1");
    }
    run_gen(ge);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e); // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const tsdict::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
