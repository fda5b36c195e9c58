#pragma once

/**
 * @file report.hpp
 * @brief End-to-end pipeline (build → fock → modular → analysis) and
 *        deterministic report emission.
 *
 * A report is a list of named tables. Rows that check something carry a
 * `check` name, the `tolerance` used and a `pass` flag; rows that name a
 * result carry an `anchor` string. JSON puts every table under "sections"
 * with sorted keys; CSV writes one file per table.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "analysis.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "modular.hpp"
#include "qcomb.hpp"
#include "repn.hpp"

namespace qfocklab {

inline constexpr const char* kVersion = "0.1.0";

/// Failure inside one pipeline stage; the message starts with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage " + stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Table {
    Table(std::string name_, std::vector<std::string> columns_)
        : name(std::move(name_)), columns(std::move(columns_)) {}

    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw Error("row width mismatch in table " + name);
        rows.push_back(std::move(row));
    }
};

struct ReportBundle {
    std::string subcommand;
    nlohmann::json provenance;
    std::vector<Table> tables;
    std::vector<std::string> failed_checks;
    std::size_t check_count = 0;

    bool pass() const noexcept { return failed_checks.empty(); }
};

enum Stage : unsigned {
    kStageGram = 1u << 0,
    kStageMoments = 1u << 1,
    kStageModular = 1u << 2,
    kStageVerdict = 1u << 3,
    kStageProbe = 1u << 4,
    kStageAll = 0x1fu,
};

namespace detail {

inline Cell cell(int v) { return static_cast<std::int64_t>(v); }
inline Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }
inline Cell cell(double v) { return v; }
inline Cell cell(bool v) { return v; }
inline Cell cell(const char* v) { return std::string(v); }
inline Cell cell(std::string v) { return v; }

/// Worker count from QFOCKLAB_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("QFOCKLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("QFOCKLAB_THREADS", "expected a positive integer");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// fn(i) for i in [0, count) on a small pool; results in index order.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, unsigned threads, Fn&& fn) {
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

template <class Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

/// Deterministic generator for one purpose: seed_seq over (seed, stream).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

inline HVector random_real_unit(const Representation& rep, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> r(rep.dim());
    double n2 = 0.0;
    for (auto& x : r) {
        x = g(rng);
        n2 += x * x;
    }
    for (auto& x : r) x /= std::sqrt(n2);
    return rep.from_real(r);
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

/// Runs the stages selected by `stages` and assembles the bundle.
inline ReportBundle run(const RunConfig& config, unsigned stages = kStageAll, const std::string& subcommand = "report",
                        unsigned threads = 0) {
    using detail::cell;
    if (threads == 0) threads = detail::worker_count();

    auto rep = detail::in_stage("build", [&] { return build(config.spec()); });
    auto fock = detail::in_stage("fock", [&] {
        return build_fock(rep, config.q, config.cutoff,
                          FockBudget{config.budgets.max_basis_words, config.budgets.max_gram_entries});
    });
    const ModularData md = detail::in_stage("modular", [&] { return build_modular(fock); });
    std::vector<HVector> vectors;
    for (const auto& v : config.vectors) vectors.push_back(rep.from_real(v.normalized));
    const std::size_t nv = vectors.size();

    ReportBundle bundle;
    bundle.subcommand = subcommand;
    bundle.provenance = {
        {"config", config_to_json(config)},
        {"tool", "qfocklab"},
        {"version", kVersion},
        {"subcommand", subcommand},
        {"seed", config.seed},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
    };

    if (stages & kStageGram) {
        Table t{"gram",
                {"check", "level", "size", "blocks", "min_eigenvalue", "max_eigenvalue", "condition", "cholesky",
                 "tolerance", "pass", "anchor"}};
        detail::in_stage("gram", [&] {
            for (int n = 0; n <= fock.cutoff(); ++n) {
                const auto d = fock.diagnostics(n);
                t.add({cell("gram[level=" + std::to_string(n) + "]"), cell(n), cell(d.size), cell(d.blocks),
                       cell(d.min_eigenvalue), cell(d.max_eigenvalue), cell(d.condition), cell(d.cholesky),
                       cell(0.0), cell(d.min_eigenvalue > 0.0),
                       cell("q-Fock inner product: Σ_π q^{inv(π)} Π⟨ξ_k, η_π(k)⟩_U is positive definite")});
            }
            return 0;
        });
        bundle.tables.push_back(std::move(t));
    }

    if (stages & kStageMoments) {
        Table moments{"moments",
                      {"check", "vector", "n", "matrix", "imag", "oracle", "difference", "tolerance", "pass",
                       "anchor"}};
        Table norms{"norms",
                    {"check", "vector", "n", "numeric", "closed_form", "difference", "tolerance", "pass", "anchor"}};
        detail::in_stage("moments", [&] {
            auto rows = detail::parallel_map<std::vector<MomentRow>>(
                nv, threads, [&](std::size_t i) { return moment_report(fock, vectors[i], config.n_max_moments); });
            for (std::size_t i = 0; i < nv; ++i)
                for (const auto& r : rows[i])
                    moments.add({cell("moments[" + config.vectors[i].name + ",n=" + std::to_string(r.n) + "]"),
                                 cell(config.vectors[i].name), cell(r.n), cell(r.matrix), cell(r.imag),
                                 cell(r.oracle), cell(r.difference), cell(r.tolerance), cell(r.pass),
                                 cell("moment formula: φ(s_q(ξ)^n) = Σ_V q^{cr(V)}, 0 for odd n")});
            for (std::size_t i = 0; i < nv; ++i)
                for (int n = 0; n <= fock.cutoff(); ++n) {
                    const double numeric = std::pow(norm_q(fock, tensor_power(fock, vectors[i], n)), 2);
                    const double closed = q_factorial(n).evaluate(fock.q());
                    const double tol = 1e-10 * std::max(1.0, closed);
                    norms.add({cell("norms[" + config.vectors[i].name + ",n=" + std::to_string(n) + "]"),
                               cell(config.vectors[i].name), cell(n), cell(numeric), cell(closed),
                               cell(std::abs(numeric - closed)), cell(tol), cell(std::abs(numeric - closed) < tol),
                               cell("‖ξ^{⊗n}‖_q² = [n]_q!")});
                }
            return 0;
        });
        bundle.tables.push_back(std::move(moments));
        bundle.tables.push_back(std::move(norms));
    }

    if (stages & kStageModular) {
        Table cov{"covariance", {"check", "vector", "t", "residual", "tolerance", "pass", "anchor"}};
        Table lemma{"delta_lemma",
                    {"check", "block", "lambda", "alpha", "numeric", "closed_form", "difference", "beta_spread",
                     "tolerance", "pass", "anchor"}};
        Table quarter{"delta_quarter",
                      {"check", "vector", "numeric", "closed_form", "difference", "tolerance", "pass", "anchor"}};
        Table structure{"modular_checks", {"check", "value", "reference", "residual", "tolerance", "pass", "anchor"}};
        detail::in_stage("modular", [&] {
            struct CovRow {
                std::vector<double> residuals;
            };
            auto covs = detail::parallel_map<CovRow>(nv, threads, [&](std::size_t i) {
                CovRow r;
                const auto s = field(fock, vectors[i]);
                for (double t : config.t_grid) {
                    const auto lhs = flow_unitary(md, t) * s * flow_unitary(md, -t);
                    const auto rhs = field(fock, evolve(rep, vectors[i], t));
                    r.residuals.push_back(q_hs_norm(fock, lhs - rhs, fock.cutoff() - 1));
                }
                return r;
            });
            for (std::size_t i = 0; i < nv; ++i)
                for (std::size_t k = 0; k < config.t_grid.size(); ++k) {
                    const double res = covs[i].residuals[k];
                    cov.add({cell("covariance[" + config.vectors[i].name + ",t=" + detail::fmt(config.t_grid[k]) + "]"),
                             cell(config.vectors[i].name), cell(config.t_grid[k]), cell(res), cell(1e-10),
                             cell(res < 1e-10), cell("modular covariance: σ_{−t}(s_q(ξ)) = s_q(U_tξ)")});
                }

            for (int k = 0; k < rep.block_count(); ++k)
                for (double alpha : {0.0, 0.1, 0.25, 0.5, 0.9}) {
                    const auto r = delta_alpha_norm_xi0(md, alpha, k);
                    const double diff = std::abs(r.numeric - r.closed_form);
                    lemma.add({cell("delta_lemma[block=" + std::to_string(k) + ",alpha=" + detail::fmt(alpha) + "]"),
                               cell(k), cell(rep.spec().lambdas[k]), cell(alpha), cell(r.numeric),
                               cell(r.closed_form), cell(diff), cell(r.beta_spread), cell(1e-12),
                               cell(diff < 1e-12 && r.beta_spread < 1e-12),
                               cell("‖Δ^{α+iβ}ξ_0‖_q = √((λ^{2α} + λ^{1−2α})/(1+λ))")});
                }

            for (std::size_t i = 0; i < nv; ++i) {
                const auto r = delta_quarter_norm(md, vectors[i]);
                const double diff = std::abs(r.numeric - r.closed_form);
                quarter.add({cell("delta_quarter[" + config.vectors[i].name + "]"), cell(config.vectors[i].name),
                             cell(r.numeric), cell(r.closed_form), cell(diff), cell(1e-12), cell(diff < 1e-12),
                             cell("‖Δ^{1/4}ξ‖_q² = ⟨(2A^{1/2}/(1+A))ξ, ξ⟩_{H_C}")});
            }

            const auto j = modular_conjugation(md);
            const double jj = q_hs_norm(fock, j * j - GradedOperator::identity(fock), fock.cutoff());
            structure.add({cell("J_involution"), cell(jj), cell(0.0), cell(jj), cell(1e-12), cell(jj < 1e-12),
                           cell("J_φ² = 1")});

            auto rng = detail::stream_rng(config.seed, 1);
            {
                // S_φ reverses a random real word of full length.
                std::vector<HVector> letters;
                for (int k = 0; k < fock.cutoff(); ++k) letters.push_back(detail::random_real_unit(rep, rng));
                std::vector<HVector> reversed(letters.rbegin(), letters.rend());
                const auto out = tomita_operator(md).apply(tensor_word(fock, letters));
                const double res = (out - tensor_word(fock, reversed)).max_abs();
                structure.add({cell("S_reverses_words"), cell(res), cell(0.0), cell(res), cell(1e-10),
                               cell(res < 1e-10), cell("S_φ(ξ_1⊗⋯⊗ξ_n) = ξ_n⊗⋯⊗ξ_1")});
            }
            if (fock.cutoff() >= 3) {
                std::normal_distribution<double> g;
                std::vector<GradedOperator> a, x;
                for (int l = 0; l < 3; ++l) {
                    for (auto* target : {&a, &x}) {
                        GradedOperator op = Complex(g(rng), g(rng)) * GradedOperator::identity(fock);
                        op += Complex(g(rng), g(rng)) * field(fock, detail::random_real_unit(rep, rng));
                        target->push_back(std::move(op));
                    }
                }
                const auto w = cp_pairing_witness(md, a, x);
                const double diff = std::abs(w.pairing - Complex(w.norm_squared));
                const double tol = 1e-9 * std::max(1.0, w.norm_squared);
                structure.add({cell("cp_pairing_witness"), cell(w.pairing.real()), cell(w.norm_squared), cell(diff),
                               cell(tol), cell(diff < tol && w.pairing.real() >= -1e-9),
                               cell("Σ_{l,m} ⟨a_l*a_mΩ, J x_m*x_l Ω⟩ = ‖Σ_l J x_l J a_l Ω‖² ≥ 0")});
            }
            return 0;
        });
        bundle.tables.push_back(std::move(cov));
        bundle.tables.push_back(std::move(lemma));
        bundle.tables.push_back(std::move(quarter));
        bundle.tables.push_back(std::move(structure));
    }

    if (stages & kStageVerdict) {
        Table verdicts{"verdicts",
                       {"check", "vector", "original_norm", "mu", "mu_closed", "mu_mixed", "mu_deficit",
                        "non_fixed_norm", "verdict", "dichotomy_consistent", "tolerance", "pass", "conclusion",
                        "anchor"}};
        Table certs{"certificates",
                    {"check", "vector", "kind", "partial", "closed", "tail", "identity_residual", "cross_check",
                     "tolerance", "pass", "anchor"}};
        Table emb{"embedding",
                  {"check", "vector", "m", "coefficient", "expected", "difference", "tolerance", "pass", "anchor"}};
        detail::in_stage("analysis", [&] {
            auto reports = detail::parallel_map<AnalysisReport>(nv, threads, [&](std::size_t i) {
                const GeneratorSubalgebraModel model(fock, md, vectors[i]);
                return split_verdict(model, 100, config.seed + i);
            });
            for (std::size_t i = 0; i < nv; ++i) {
                const auto& r = reports[i];
                const auto& name = config.vectors[i].name;
                const bool agree = std::abs(r.mu - r.mu_closed) < 1e-12 && std::abs(r.mu - r.mu_mixed) < 1e-12;
                verdicts.add({cell("verdict[" + name + "]"), cell(name), cell(config.vectors[i].original_norm),
                              cell(r.mu), cell(r.mu_closed), cell(r.mu_mixed), cell(r.mu_deficit),
                              cell(r.non_fixed_norm), cell(verdict_label(r.verdict)), cell(r.dichotomy_consistent),
                              cell(1e-12), cell(agree && r.dichotomy_consistent), cell(r.conclusion),
                              cell("μ = 2λ^{1/2}/(1+λ) on a block; ξ not fixed by U_t ⇒ M_ξ ⊆ M_q quasi-split")});
                for (std::size_t m = 0; m < r.coefficients.size(); ++m) {
                    const double expected = std::pow(r.mu, 0.5 * static_cast<double>(m));
                    const double diff = std::abs(r.coefficients[m] - expected);
                    emb.add({cell("embedding[" + name + ",m=" + std::to_string(m) + "]"), cell(name), cell(m),
                             cell(r.coefficients[m]), cell(expected), cell(diff), cell(1e-12), cell(diff < 1e-12),
                             cell("‖Δ^{1/4}(ξ^{⊗m}/√([m]_q!))‖_q = μ^{m/2}")});
                }
                if (r.hs) {
                    const auto& h = *r.hs;
                    const double cross = std::abs(h.partial_from_coefficients - h.partial);
                    const bool pass = h.identity_residual < 1e-12 && cross < 1e-10 &&
                                      std::abs(h.max_coefficient - 1.0) < 1e-12 && h.partial <= h.closed;
                    certs.add({cell("hs[" + name + "]"), cell(name), cell("hilbert_schmidt"), cell(h.partial),
                               cell(h.closed), cell(h.tail), cell(h.identity_residual), cell(cross), cell(1e-12),
                               cell(pass), cell("Φ_2 on M_ξ is a Hilbert-Schmidt operator of norm 1, Σ μ^m = 1/(1−μ)")});
                }
                if (r.nuclear) {
                    const auto& c = *r.nuclear;
                    const bool pass = c.identity_residual < 1e-12 && c.max_functional_ratio <= 1.0 + 1e-12;
                    certs.add({cell("nuclear[" + name + "]"), cell(name), cell("nuclear"), cell(c.partial),
                               cell(c.closed), cell(c.tail), cell(c.identity_residual), cell(c.max_functional_ratio),
                               cell(1e-12), cell(pass),
                               cell("Φ_2 on M_ξ is a nuclear map, Σ ‖ψ_m‖‖ξ_m‖ ≤ 1/(1−√μ)")});
                }
            }
            return 0;
        });
        bundle.tables.push_back(std::move(verdicts));
        bundle.tables.push_back(std::move(certs));
        bundle.tables.push_back(std::move(emb));
    }

    if (stages & kStageProbe) {
        Table probe{"probe",
                    {"check", "vector", "degree", "span", "dimension", "residual", "threshold", "pass", "note"}};
        Table spectrum{"probe_spectrum", {"vector", "index", "singular_value", "null"}};
        detail::in_stage("probe", [&] {
            auto results = detail::parallel_map<ProbeResult>(nv, threads, [&](std::size_t i) {
                return commutant_probe(fock, vectors[i], config.probe_degree,
                                       ProbeBudget{config.budgets.max_probe_span, config.budgets.max_probe_entries});
            });
            for (std::size_t i = 0; i < nv; ++i) {
                const auto& r = results[i];
                const auto& name = config.vectors[i].name;
                probe.add({cell("probe[" + name + "]"), cell(name), cell(r.degree), cell(r.span), cell(r.dimension),
                           cell(r.residual), cell(kProbeNullThreshold), cell(r.dimension >= 1),
                           cell("truncation-level evidence only; does not decide M_ξ' ∩ M_q")});
                for (std::size_t k = 0; k < r.singular_values.size(); ++k)
                    spectrum.add({cell(name), cell(k), cell(r.singular_values[k]),
                                  cell(r.singular_values[k] < kProbeNullThreshold)});
            }
            return 0;
        });
        bundle.tables.push_back(std::move(probe));
        bundle.tables.push_back(std::move(spectrum));
    }

    for (const auto& t : bundle.tables) {
        const auto check_col = std::find(t.columns.begin(), t.columns.end(), "check") - t.columns.begin();
        const auto pass_col = std::find(t.columns.begin(), t.columns.end(), "pass") - t.columns.begin();
        if (check_col == static_cast<std::ptrdiff_t>(t.columns.size()) ||
            pass_col == static_cast<std::ptrdiff_t>(t.columns.size()))
            continue;
        for (const auto& row : t.rows) {
            ++bundle.check_count;
            if (!std::get<bool>(row[pass_col])) bundle.failed_checks.push_back(std::get<std::string>(row[check_col]));
        }
    }
    return bundle;
}

namespace detail {

inline nlohmann::json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                return v;
            } else return v;
        },
        c);
}

inline std::string csv_field(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
            else if constexpr (std::is_same_v<T, double>) return fmt(v);
            else {
                if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
                std::string out = "\"";
                for (char ch : v) {
                    if (ch == '"') out += '"';
                    out += ch;
                }
                return out + "\"";
            }
        },
        c);
}

/// Writes `text` to `path` through a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

} // namespace detail

inline nlohmann::json bundle_json(const ReportBundle& b) {
    nlohmann::json j;
    j["provenance"] = b.provenance;
    j["sections"] = nlohmann::json::object();
    for (const auto& t : b.tables) {
        auto rows = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t c = 0; c < t.columns.size(); ++c) obj[t.columns[c]] = detail::cell_json(row[c]);
            rows.push_back(std::move(obj));
        }
        j["sections"][t.name] = std::move(rows);
    }
    j["summary"] = {{"checks", b.check_count},
                    {"failed", b.failed_checks.size()},
                    {"failed_checks", b.failed_checks},
                    {"pass", b.pass()}};
    return j;
}

/// UTF-8 JSON, sorted keys, shortest round-trip floats, trailing newline.
inline std::string to_json_text(const ReportBundle& b) { return bundle_json(b).dump(2) + "\n"; }

inline std::string to_csv_text(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += detail::csv_field(t.columns[c]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += detail::csv_field(row[c]);
        }
        out += '\n';
    }
    return out;
}

/// Provenance and summary as key,value tables, so a CSV directory is complete on its own.
inline std::vector<Table> csv_tables(const ReportBundle& b) {
    std::vector<Table> out = b.tables;
    Table prov{"provenance", {"key", "value"}};
    for (const auto& [k, v] : b.provenance.items())
        prov.add({std::string(k), v.is_string() ? v.get<std::string>() : v.dump()});
    out.push_back(std::move(prov));
    Table summary{"summary", {"checks", "failed", "pass"}};
    summary.add({static_cast<std::int64_t>(b.check_count), static_cast<std::int64_t>(b.failed_checks.size()),
                 b.pass()});
    out.push_back(std::move(summary));
    return out;
}

enum class Format { Json, Csv };

/// JSON goes to `path` (a file). CSV goes to `path` as a directory holding one
/// <table>.csv per section.
inline void emit(const ReportBundle& b, Format format, const std::filesystem::path& path) {
    if (format == Format::Json) {
        detail::atomic_write(path, to_json_text(b));
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw Error("cannot create directory " + path.string() + ": " + ec.message());
    for (const auto& t : csv_tables(b)) detail::atomic_write(path / (t.name + ".csv"), to_csv_text(t));
}

} // namespace qfocklab
