#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "jspec/io.hpp"
#include "jspec/jordan.hpp"
#include "jspec/preserver.hpp"
#include "jspec/rank_witness.hpp"
#include "jspec/reconstruction.hpp"
#include "jspec/rng.hpp"

namespace {

using namespace jspec;

constexpr int kExitOk = 0;
constexpr int kExitCounterexample = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string in, in2, out;
  int r = -1, s = -1;
  std::string signature;
  int n = 6;
  int trials = 1000;
  std::uint64_t seed = 0;
  int budget = 2000;
  std::string lemma;
  ToleranceConfig tol;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Report {
 public:
  explicit Report(const std::string& command) {
    lines_.push_back("jspec-report 1");
    lines_.push_back("command " + command);
  }
  void kv(const std::string& key, const std::string& value) {
    lines_.push_back(key + " " + value);
  }
  void kv(const std::string& key, double value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value;
    kv(key, ss.str());
  }
  void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
  void kv(const std::string& key, const Complex& value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value.real() << " " << value.imag();
    kv(key, ss.str());
  }
  void matrix(const std::string& key, const ComplexMatrix& m) {
    kv(key, matrix_document(m).dump());
  }
  void spectrum_values(const std::string& key, const Spectrum& sp) {
    std::ostringstream ss;
    ss.precision(17);
    for (size_t i = 0; i < sp.values.size(); ++i) {
      if (i) ss << " ";
      ss << "[" << sp.values[i].real() << "," << sp.values[i].imag() << "]";
    }
    kv(key, ss.str());
  }
  int finish(const Options& opt, int status) {
    kv("status", status == kExitOk          ? "ok"
                 : status == kExitCounterexample ? "counterexample"
                                                : "error");
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!opt.out.empty()) {
      file.open(opt.out);
      if (!file) {
        std::cerr << "error: cannot write " << opt.out << "\n";
        return kExitUsage;
      }
      out = &file;
    }
    for (const auto& line : lines_) *out << line << "\n";
    return status;
  }

 private:
  std::vector<std::string> lines_;
};

void resolve_exponents(Options& opt, bool required) {
  if (!opt.signature.empty()) {
    ProductSignature sig = ProductSignature::parse(opt.signature);
    opt.r = sig.r();
    opt.s = sig.s();
  }
  if (required && (opt.r < 0 || opt.s < 0))
    throw CLI::ValidationError("--r/--s or --signature required");
}

int cmd_spectrum(Options& opt) {
  Report report("spectrum");
  ComplexMatrix a = parse_matrix_text(read_file(opt.in));
  Spectrum sp = spectrum(a, opt.tol);
  report.kv("n", int(a.rows()));
  report.spectrum_values("spectrum", sp);
  report.kv("distinct_nonzero", sp.distinct_nonzero_count(opt.tol));
  return report.finish(opt, kExitOk);
}

int cmd_product(Options& opt) {
  Report report("product");
  resolve_exponents(opt, true);
  ComplexMatrix a = parse_matrix_text(read_file(opt.in));
  ComplexMatrix b = parse_matrix_text(read_file(opt.in2));
  ComplexMatrix prod = two_slot_product(a, b, opt.r, opt.s);
  report.kv("r", opt.r);
  report.kv("s", opt.s);
  report.matrix("product", prod);
  report.spectrum_values("spectrum", spectrum(prod, opt.tol));
  return report.finish(opt, kExitOk);
}

int cmd_classify(Options& opt) {
  Report report("classify-rank");
  resolve_exponents(opt, true);
  ComplexMatrix a = parse_matrix_text(read_file(opt.in));
  ClassifyResult res =
      classify_rank_one(a, opt.r, opt.s, opt.budget, opt.seed, opt.tol);
  const char* verdict = res.verdict == RankVerdict::RankOne ? "RankOne"
                        : res.verdict == RankVerdict::NotRankOne ? "NotRankOne"
                        : res.verdict == RankVerdict::SquareZeroRank2
                            ? "SquareZeroRank2"
                            : "Inconclusive";
  report.kv("verdict", verdict);
  report.kv("fuzz_trials", res.fuzz_trials_run);
  if (res.witness) {
    report.kv("construction", res.witness->construction);
    report.matrix("witness", res.witness->witness);
    report.spectrum_values("witness_spectrum", res.witness->spectrum);
  }
  return report.finish(
      opt, res.verdict == RankVerdict::Inconclusive ? kExitCounterexample
                                                    : kExitOk);
}

int cmd_witness(Options& opt) {
  Report report("witness");
  resolve_exponents(opt, true);
  ComplexMatrix a = parse_matrix_text(read_file(opt.in));
  try {
    WitnessReport rep = construct_witness(a, opt.r, opt.s, opt.tol);
    report.kv("construction", rep.construction);
    report.matrix("witness", rep.witness);
    report.spectrum_values("product_spectrum", rep.spectrum);
    report.kv("distinct_nonzero", rep.distinct_nonzero_count);
    return report.finish(opt, kExitOk);
  } catch (const CanonicalFormNotReached& err) {
    report.kv("failure", err.what());
    return report.finish(opt, kExitCounterexample);
  }
}

int cmd_reconstruct(Options& opt) {
  Report report("reconstruct");
  resolve_exponents(opt, true);
  ComplexMatrix a = parse_matrix_text(read_file(opt.in));
  SpectralOracle oracle = matrix_oracle(a, opt.r, opt.s, opt.tol);
  ComplexMatrix rec = recover_matrix(oracle, opt.seed, opt.budget, opt.tol);
  double rel = (rec - a).norm() / std::max(1e-300, a.norm());
  report.kv("relative_error", rel);
  report.matrix("recovered", rec);
  return report.finish(opt, rel <= 1e-8 ? kExitOk : kExitCounterexample);
}

int cmd_recover(Options& opt) {
  Report report("recover");
  resolve_exponents(opt, true);
  MapSpec spec = parse_map_text(read_file(opt.in));
  try {
    PreserverModel model =
        (spec.has_reference && spec.reference.unitary)
            ? recover_selfadjoint(spec.map, opt.r, opt.s, opt.seed, opt.tol)
            : recover_full(spec.map, opt.r, opt.s, opt.seed, opt.tol);
    report.kv("lambda", model.lambda);
    report.kv("transposed", model.transposed ? "true" : "false");
    report.kv("m", model.m);
    report.kv("residual", model.residual);
    report.matrix("t", model.t);
    if (spec.has_reference) {
      double pd = projective_distance(model.t, spec.reference.t);
      report.kv("reference_projective_distance", pd);
      report.kv("reference_lambda_match",
                std::abs(model.lambda - spec.reference.lambda) <= 1e-8
                    ? "true"
                    : "false");
      bool match = pd <= 1e-6 &&
                   std::abs(model.lambda - spec.reference.lambda) <= 1e-8 &&
                   model.transposed == spec.reference.transposed;
      return report.finish(opt, match ? kExitOk : kExitCounterexample);
    }
    return report.finish(opt, kExitOk);
  } catch (const std::runtime_error& err) {
    report.kv("failure", err.what());
    return report.finish(opt, kExitCounterexample);
  }
}

int cmd_verify(Options& opt) {
  Report report("verify");
  resolve_exponents(opt, true);
  MapSpec spec = parse_map_text(read_file(opt.in));
  HypothesisReport rep =
      verify_hypothesis(spec.map, opt.r, opt.s, opt.trials, opt.seed, opt.tol);
  report.kv("trials", rep.trials);
  report.kv("passes", rep.passes);
  report.kv("max_mismatch", rep.max_mismatch);
  if (rep.counterexample_a) {
    report.matrix("counterexample_a", *rep.counterexample_a);
    report.matrix("counterexample_b", *rep.counterexample_b);
  }
  return report.finish(
      opt, rep.passes == rep.trials ? kExitOk : kExitCounterexample);
}

// ---- fuzz campaigns --------------------------------------------------------

struct Campaign {
  int trials = 0;
  int passes = 0;
  std::vector<std::string> failures;  // first few, replayable by trial index

  void record(int trial, bool ok, const std::string& detail = "") {
    ++trials;
    if (ok) {
      ++passes;
    } else if (failures.size() < 5) {
      failures.push_back("trial " + std::to_string(trial) +
                         (detail.empty() ? "" : " " + detail));
    }
  }
};

ComplexMatrix random_by_class(TrialRng& rng, int n, int cls) {
  switch (cls % 4) {
    case 0: return rng.low_rank_matrix(n, 1);
    case 1: return rng.low_rank_matrix(n, 2);
    case 2: return rng.low_rank_matrix(n, 3);
    default: return rng.matrix(n);
  }
}

// rank-2 matrix with square zero (needs n >= 4)
ComplexMatrix square_zero_matrix(TrialRng& rng, int n, int rk) {
  ComplexMatrix p = rng.matrix(n);
  while (std::abs(p.determinant()) < 1e-6) p = rng.matrix(n);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  a.block(0, n / 2, rk, rk) = rng.matrix(rk);
  return p * a * p.inverse();
}

Campaign fuzz_rank_witness(const Options& opt, int r, int s) {
  Campaign c;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    ComplexMatrix a = random_by_class(rng, opt.n, trial);
    int true_rank = rank(a, opt.tol);
    ClassifyResult res = classify_rank_one(a, r, s, 400,
                                           splitmix64(opt.seed) + trial, opt.tol);
    bool ok = (true_rank == 1) ? res.verdict == RankVerdict::RankOne
                               : res.verdict == RankVerdict::NotRankOne;
    c.record(trial, ok);
  }
  return c;
}

Campaign fuzz_square_zero(const Options& opt) {
  Campaign c;
  const int n = std::max(4, opt.n);
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    ComplexMatrix a = square_zero_matrix(rng, n, 2);
    FuzzReport fz = rank_one_fuzz_negative(a, 0, std::max(1, opt.s), 50,
                                           splitmix64(opt.seed) + trial, opt.tol);
    c.record(trial, fz.pass);
  }
  return c;
}

Campaign fuzz_reconstruction(const Options& opt, int r, int s) {
  Campaign c;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    ComplexMatrix a = rng.matrix(opt.n);
    SpectralOracle oracle = matrix_oracle(a, r, s, opt.tol);
    ComplexMatrix rec = recover_matrix(oracle, splitmix64(opt.seed) + trial,
                                       4000, opt.tol);
    c.record(trial, (rec - a).norm() <= 1e-8 * a.norm());
  }
  return c;
}

RankOneFunctional random_idempotent(TrialRng& rng, int n) {
  while (true) {
    ComplexVector x = rng.vector(n), f = rng.vector(n);
    Complex pr = (f.transpose() * x)(0);
    if (std::abs(pr) < 0.1) continue;
    return RankOneFunctional(x, f / pr);
  }
}

Campaign fuzz_eig_class(const Options& opt) {
  Campaign c;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    ComplexMatrix a = rng.matrix(opt.n);
    RankOneFunctional p = random_idempotent(rng, opt.n);
    EigClassReport cls = jordan_eig_class(a, p, opt.tol);
    Spectrum sp = spectrum(a * p.matrix() + p.matrix() * a, opt.tol);
    bool ok = true;
    if (cls.cls != JordanEigClass::Other) {
      Spectrum predicted;
      predicted.scale = sp.scale;
      for (const Complex& root : {cls.root_plus, cls.root_minus}) {
        bool dup = false;
        for (const auto& v : predicted.values)
          if (std::abs(v - root) <= opt.tol.distinct * sp.scale) dup = true;
        if (!dup && std::abs(root) > opt.tol.zero * sp.scale)
          predicted.values.push_back(root);
      }
      std::vector<Complex> observed;
      for (const auto& v : sp.values)
        if (std::abs(v) > opt.tol.zero * sp.scale) observed.push_back(v);
      ok = predicted.values.size() == observed.size();
      if (ok)
        for (const auto& pv : predicted.values) {
          bool found = false;
          for (const auto& ov : observed)
            if (std::abs(pv - ov) <= 1e-8 * sp.scale) found = true;
          ok = ok && found;
        }
    }
    c.record(trial, ok);
  }
  return c;
}

Campaign fuzz_perturbation(const Options& opt) {
  Campaign c;
  const double delta = 1e-3;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    std::vector<ComplexMatrix> as;
    for (int i = 0; i < 3; ++i) as.push_back(rng.matrix(opt.n));
    RankOneFunctional p = random_idempotent(rng, opt.n);
    bool ok = true;
    try {
      RankOneFunctional q = perturb_to_generic(as, p, delta, opt.tol);
      ok = q.distance(p) < delta;
      for (const auto& a : as) ok = ok && is_generic_for(a, q, opt.tol);
    } catch (const std::exception&) {
      ok = false;
    }
    c.record(trial, ok);
  }
  return c;
}

Campaign fuzz_orthogonality(const Options& opt) {
  Campaign c;
  const int n = opt.n;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    RankOneFunctional p = random_idempotent(rng, n);
    bool want_orthogonal = trial % 2 == 0;
    bool ok = true;
    try {
      ComplexVector u, h;
      if (want_orthogonal) {
        // <u,f> = 0 and <x,h> = 0 force PQ = QP = 0
        u = rng.vector(n);
        u -= (p.f().transpose() * u)(0) / p.f().squaredNorm() * p.f().conjugate();
        h = rng.vector(n);
        h -= (h.transpose() * p.x())(0) / p.x().squaredNorm() * p.x().conjugate();
      } else {
        // <x,h> = 0 keeps sigma(PQ+QP) = {0}; <u,f> != 0 breaks PQ = 0
        h = rng.vector(n);
        h -= (h.transpose() * p.x())(0) / p.x().squaredNorm() * p.x().conjugate();
        u = rng.vector(n);
        if (std::abs((p.f().transpose() * u)(0)) < 0.05) continue;
      }
      Complex pr = (h.transpose() * u)(0);
      if (std::abs(pr) < 0.05) continue;
      RankOneFunctional q(u, h / pr);
      bool direct = orthogonality_test(p, q, OrthogonalityMode::Direct, 200,
                                       splitmix64(opt.seed) + trial, opt.tol);
      bool witness = orthogonality_test(p, q, OrthogonalityMode::Witness, 200,
                                        splitmix64(opt.seed) + trial, opt.tol);
      ok = direct == witness && direct == want_orthogonal;
    } catch (const HypothesisViolated&) {
      continue;
    }
    c.record(trial, ok);
  }
  return c;
}

Campaign fuzz_selfadjoint_witness(const Options& opt, int r, int s) {
  Campaign c;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    int rk = 1 + trial % 3;
    ComplexMatrix g(opt.n, rk);
    for (int i = 0; i < opt.n; ++i)
      for (int j = 0; j < rk; ++j) g(i, j) = rng.cgauss();
    ComplexMatrix d = ComplexMatrix::Zero(rk, rk);
    for (int j = 0; j < rk; ++j) d(j, j) = rng.gauss() + (rng.gauss() > 0 ? 2 : -2);
    ComplexMatrix a = g * d * g.adjoint();
    a = (a + a.adjoint()) / 2.0;
    bool ok = true;
    if (rank(a, opt.tol) <= 1) {
      FuzzReport fz = rank_one_fuzz_negative(a, r, s, 50,
                                             splitmix64(opt.seed) + trial,
                                             opt.tol);
      ok = fz.pass;
    } else {
      try {
        WitnessReport rep = construct_witness_selfadjoint(a, r, s, opt.tol);
        ok = rep.distinct_nonzero_count >= 3 &&
             (rep.witness - rep.witness.adjoint()).norm() <=
                 1e-8 * std::max(1.0, rep.witness.norm());
      } catch (const std::exception&) {
        ok = false;
      }
    }
    c.record(trial, ok);
  }
  return c;
}

ComplexMatrix random_bounded_transform(TrialRng& rng, int n) {
  // singular values in [1/2, 2]: condition number at most 4
  ComplexMatrix g1 = rng.matrix(n), g2 = rng.matrix(n);
  Eigen::HouseholderQR<ComplexMatrix> q1(g1), q2(g2);
  ComplexMatrix u = q1.householderQ(), v = q2.householderQ();
  Eigen::VectorXd sv(n);
  for (int i = 0; i < n; ++i) sv(i) = 0.5 + 1.5 * rng.uniform();
  return u * sv.cast<Complex>().asDiagonal() * v.adjoint();
}

ComplexMatrix random_unitary(TrialRng& rng, int n) {
  Eigen::HouseholderQR<ComplexMatrix> qr(rng.matrix(n));
  ComplexMatrix q = qr.householderQ();
  return q;
}

Complex random_root_of_unity(TrialRng& rng, int m) {
  int k = rng.uniform_int(0, m - 1);
  return std::exp(Complex(0, 2.0 * 3.14159265358979323846 * k / m));
}

Campaign fuzz_model_roundtrip(const Options& opt, int r, int s,
                              const std::string& which) {
  Campaign c;
  const int m = r + s + 1;
  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialRng rng(opt.seed, std::uint64_t(trial));
    bool transposed = trial % 2 == 1;
    bool ok = true;
    try {
      if (which == "thm3.1") {
        ComplexMatrix u = random_unitary(rng, opt.n);
        double xi = (m % 2 == 0 && trial % 4 >= 2) ? -1.0 : 1.0;
        BlackBoxMap phi = make_unitary_map(xi, u, transposed);
        PreserverModel model =
            recover_selfadjoint(phi, r, s, splitmix64(opt.seed) + trial, opt.tol);
        ok = std::abs(model.lambda - xi) <= 1e-8 &&
             projective_distance(model.t, u) <= 1e-6;
      } else {
        const int n = which == "ck" ? 2 : opt.n;
        ComplexMatrix t = random_bounded_transform(rng, n);
        Complex lambda = random_root_of_unity(rng, m);
        BlackBoxMap phi = make_similarity_map(lambda, t, transposed);
        PreserverModel model =
            which == "ck"
                ? recover_2x2(phi, r, s, splitmix64(opt.seed) + trial, opt.tol)
                      .model
                : recover_full(phi, r, s, splitmix64(opt.seed) + trial, opt.tol);
        ok = std::abs(model.lambda - lambda) <= 1e-8 &&
             projective_distance(model.t, t) <= 1e-6 && model.residual <= 1e-6;
        if (n >= 3) ok = ok && model.transposed == transposed;
      }
    } catch (const std::exception&) {
      ok = false;
    }
    c.record(trial, ok);
  }
  return c;
}

int cmd_fuzz(Options& opt) {
  Report report("fuzz");
  auto start = std::chrono::steady_clock::now();
  int r = opt.r, s = opt.s;
  Campaign c;
  if (opt.lemma == "2.3") {
    if (r < 0) r = 1;
    if (s < 0) s = 2;
    c = fuzz_rank_witness(opt, r, s);
  } else if (opt.lemma == "2.4") {
    c = fuzz_rank_witness(opt, 0, s < 1 ? 2 : s);
  } else if (opt.lemma == "2.5") {
    c = fuzz_square_zero(opt);
  } else if (opt.lemma == "2.6") {
    if (r < 0) r = 1;
    if (s < 0) s = 2;
    c = fuzz_reconstruction(opt, r, s);
  } else if (opt.lemma == "2.8") {
    c = fuzz_eig_class(opt);
  } else if (opt.lemma == "2.9") {
    c = fuzz_perturbation(opt);
  } else if (opt.lemma == "2.10") {
    c = fuzz_orthogonality(opt);
  } else if (opt.lemma == "3.4") {
    if (r < 0) r = 1;
    if (s < 0) s = 2;
    c = fuzz_selfadjoint_witness(opt, r, s);
  } else if (opt.lemma == "ck" || opt.lemma == "thm2.2" ||
             opt.lemma == "thm3.1") {
    if (r < 0) r = 1;
    if (s < 0) s = 2;
    c = fuzz_model_roundtrip(opt, r, s, opt.lemma);
  } else {
    throw CLI::ValidationError("unknown --lemma value: " + opt.lemma);
  }
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  report.kv("lemma", opt.lemma);
  report.kv("trials", c.trials);
  report.kv("passes", c.passes);
  report.kv("failures", c.trials - c.passes);
  report.kv("seed", std::to_string(opt.seed));
  report.kv("tol_zero", opt.tol.zero);
  report.kv("tol_distinct", opt.tol.distinct);
  report.kv("tol_rank", opt.tol.rank);
  report.kv("tol_match", opt.tol.match);
  for (const auto& f : c.failures) report.kv("failure", f);
  report.kv("wall_time_s", elapsed);
  return report.finish(opt,
                       c.passes == c.trials ? kExitOk : kExitCounterexample);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for generalized Jordan product spectra"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "write the report to a file");
    cmd->add_option("--tol-zero", opt.tol.zero);
    cmd->add_option("--tol-distinct", opt.tol.distinct);
    cmd->add_option("--tol-rank", opt.tol.rank);
    cmd->add_option("--tol-match", opt.tol.match);
    cmd->add_option("--seed", opt.seed);
  };
  auto add_exponents = [&](CLI::App* cmd) {
    cmd->add_option("--r", opt.r);
    cmd->add_option("--s", opt.s);
    cmd->add_option("--signature", opt.signature,
                    "product signature, e.g. 2,1,2");
  };

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum");
  spectrum_cmd->add_option("--in", opt.in)->required();
  add_common(spectrum_cmd);

  CLI::App* product_cmd = app.add_subcommand("product");
  product_cmd->add_option("--in", opt.in)->required();
  product_cmd->add_option("--in2", opt.in2)->required();
  add_exponents(product_cmd);
  add_common(product_cmd);

  CLI::App* classify_cmd = app.add_subcommand("classify-rank");
  classify_cmd->add_option("--in", opt.in)->required();
  classify_cmd->add_option("--budget", opt.budget);
  add_exponents(classify_cmd);
  add_common(classify_cmd);

  CLI::App* witness_cmd = app.add_subcommand("witness");
  witness_cmd->add_option("--in", opt.in)->required();
  add_exponents(witness_cmd);
  add_common(witness_cmd);

  CLI::App* fuzz_cmd = app.add_subcommand("fuzz");
  fuzz_cmd
      ->add_option("--lemma", opt.lemma)
      ->required()
      ->check(CLI::IsMember({"2.3", "2.4", "2.5", "2.6", "2.8", "2.9", "2.10",
                             "3.4", "ck", "thm2.2", "thm3.1"}));
  fuzz_cmd->add_option("--n", opt.n);
  fuzz_cmd->add_option("--trials", opt.trials);
  fuzz_cmd->add_option("--budget", opt.budget);
  add_exponents(fuzz_cmd);
  add_common(fuzz_cmd);

  CLI::App* reconstruct_cmd = app.add_subcommand("reconstruct");
  reconstruct_cmd->add_option("--in", opt.in)->required();
  reconstruct_cmd->add_option("--budget", opt.budget);
  add_exponents(reconstruct_cmd);
  add_common(reconstruct_cmd);

  CLI::App* recover_cmd = app.add_subcommand("recover");
  recover_cmd->add_option("--in", opt.in)->required();
  add_exponents(recover_cmd);
  add_common(recover_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify");
  verify_cmd->add_option("--in", opt.in)->required();
  verify_cmd->add_option("--trials", opt.trials);
  add_exponents(verify_cmd);
  add_common(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (spectrum_cmd->parsed()) return cmd_spectrum(opt);
    if (product_cmd->parsed()) return cmd_product(opt);
    if (classify_cmd->parsed()) return cmd_classify(opt);
    if (witness_cmd->parsed()) return cmd_witness(opt);
    if (fuzz_cmd->parsed()) return cmd_fuzz(opt);
    if (reconstruct_cmd->parsed()) return cmd_reconstruct(opt);
    if (recover_cmd->parsed()) return cmd_recover(opt);
    if (verify_cmd->parsed()) return cmd_verify(opt);
  } catch (const SchemaError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitCounterexample;
  }
  return kExitUsage;
}
