// Command-line front end: fit, rank, evaluate, synth, fold.
//
// Exit codes: 0 success, 2 input/configuration error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crescal/class_rescal.hpp"
#include "crescal/errors.hpp"
#include "crescal/eval.hpp"
#include "crescal/fold_rank.hpp"
#include "crescal/graph.hpp"
#include "crescal/model_io.hpp"
#include "crescal/rescal.hpp"

namespace fs = std::filesystem;
using namespace crescal;

namespace {

struct CommonOpts {
    std::string triples;
    std::string labels;
    std::string method = "class_rescal";
    std::string out_dir = ".";
    char delimiter = '\t';
    HyperParams params;
};

void add_hyper_flags(CLI::App* cmd, HyperParams& p) {
    cmd->set_config("--config", "",
                    "Optional key=value config file; flags win");
    cmd->add_option("--rank", p.rank, "Number of latent factors");
    cmd->add_option("--lambda-a", p.lambda_a, "Entity factor regularization");
    cmd->add_option("--lambda-r", p.lambda_r, "Relation factor regularization");
    cmd->add_option("--lambda-g", p.lambda_g, "Classifier error weight");
    cmd->add_option("--k", p.k_neighbors, "Neighbors in the k-NN vote");
    cmd->add_option("--epsilon", p.epsilon, "Relative convergence threshold");
    cmd->add_option("--max-iter", p.max_iter, "Iteration cap");
    cmd->add_option("--seed", p.seed, "Random seed (drives all randomness)");
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir + ": " +
                      ec.message());
    return p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out)
        throw IoError("cannot open for write: " + p.string());
    return out;
}

void report_skipped(const LabelLoad& load) {
    if (!load.skipped_ids.empty()) {
        std::cerr << "warning: " << load.skipped_ids.size()
                  << " label line(s) reference ids absent from the triples:";
        std::size_t shown = 0;
        for (const auto& id : load.skipped_ids) {
            if (shown++ == 10) {
                std::cerr << " ...";
                break;
            }
            std::cerr << ' ' << id;
        }
        std::cerr << '\n';
    }
}

int run_fit(const CommonOpts& opt) {
    const LoadedGraph g = load_triples(opt.triples, {opt.delimiter});
    LabelSet labels;
    if (opt.method == "rescal") {
        if (!opt.labels.empty())
            std::cerr << "warning: --labels ignored for method=rescal\n";
    } else if (opt.labels.empty()) {
        throw ConfigError("method=class_rescal requires --labels");
    }
    if (opt.method == "class_rescal") {
        const LabelLoad load = load_labels(opt.labels, g.entities, opt.delimiter);
        report_skipped(load);
        labels = load.labels;
    }

    FitResult result;
    if (opt.method == "rescal")
        result = fit_rescal(g.tensor.view(), opt.params);
    else
        result = fit_class_rescal(g.tensor.view(), labels, opt.params);

    const fs::path out = ensure_out_dir(opt.out_dir);
    save_index((out / "index.json").string(), g.entities, g.relations);
    save_model((out / "model.json").string(), result.model, "index.json");
    save_fit_report((out / "report.json").string(), result.trace, opt.params,
                    opt.method);

    const auto& trace = result.trace;
    std::cout << "fit " << opt.method << ": " << g.tensor.n_entities()
              << " entities, " << g.tensor.n_relations() << " relations, nnz "
              << g.tensor.nnz() << '\n'
              << "iterations " << trace.iterations_used()
              << (trace.converged ? " (converged)" : " (max_iter reached)")
              << '\n';
    if (!trace.iterations.empty()) {
        const auto& last = trace.iterations.back();
        std::cout << "final f " << format_double(last.f) << "  g "
                  << format_double(last.g) << "  h " << format_double(last.h)
                  << "  objective " << format_double(last.objective) << '\n';
    }
    std::cout << "model written to " << (out / "model.json").string() << '\n';
    return 0;
}

// Groups a triple file's links around ids missing from the index.
std::map<std::string, FoldInSlices> collect_fold_links(
    const std::string& path, const EntityIndex& entities,
    const EntityIndex& relations, char delimiter) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open triple file: " + path);

    std::map<std::string, FoldInSlices> out;
    const std::size_t m = relations.size();
    auto slot = [&](const std::string& id) -> FoldInSlices& {
        auto [it, inserted] = out.try_emplace(id);
        if (inserted) {
            it->second.out_links.resize(m);
            it->second.in_links.resize(m);
        }
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0, ignored = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(delimiter, start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
            fields[2].empty())
            throw ParseError(path + " line " + std::to_string(line_no) +
                             ": expected src<delim>rel<delim>dst");
        const auto rel = relations.lookup(fields[1]);
        if (!rel)
            throw ParseError(path + " line " + std::to_string(line_no) +
                             ": unknown relation '" + fields[1] + "'");
        const auto src = entities.lookup(fields[0]);
        const auto dst = entities.lookup(fields[2]);
        if (src && dst) {
            ++ignored; // both endpoints already trained
        } else if (!src && !dst) {
            ++ignored; // link between two new entities carries no projection
        } else if (!src) {
            slot(fields[0]).out_links[*rel].push_back(*dst);
        } else {
            slot(fields[2]).in_links[*rel].push_back(*src);
        }
    }
    if (ignored > 0)
        std::cerr << "warning: ignored " << ignored
                  << " triple(s) not linking a new entity to a trained one\n";

    for (auto& [id, links] : out) {
        for (auto& v : links.out_links) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        for (auto& v : links.in_links) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }
    return out;
}

int run_rank(const std::string& model_path, const std::string& labels_path,
             const std::string& fold_triples, std::size_t top,
             const std::string& out_dir, double lambda_a, char delimiter) {
    const LoadedModel lm = load_model(model_path);
    const fs::path sidecar =
        fs::path(model_path).parent_path() / lm.index_sidecar;
    const LoadedIndex idx = load_index(sidecar.string());
    if (idx.entities.size() != lm.model.n_entities() ||
        idx.relations.size() != lm.model.n_relations())
        throw ConfigError("model and index sidecar disagree on dimensions");

    LabelSet labels;
    if (!labels_path.empty()) {
        const LabelLoad load = load_labels(labels_path, idx.entities, delimiter);
        report_skipped(load);
        labels = load.labels;
    }
    const int orientation = score_orientation(lm.model.a, labels);

    std::vector<std::string> ids;
    RankingResult ranking;
    if (fold_triples.empty()) {
        ranking = rank_with_orientation(lm.model.a, orientation);
        ids = idx.entities.ids();
    } else {
        const auto links = collect_fold_links(fold_triples, idx.entities,
                                              idx.relations, delimiter);
        if (links.empty())
            throw EmptyInputError(fold_triples + ": no new entities to fold in");
        FoldInSolver solver(lm.model, lambda_a);
        DenseMatrix folded(links.size(), lm.model.rank());
        std::size_t row = 0;
        for (const auto& [id, link] : links) {
            const auto latent = solver.fold(link);
            std::copy(latent.begin(), latent.end(), folded.row(row).begin());
            ids.push_back(id);
            ++row;
        }
        ranking = rank_with_orientation(folded, orientation);
    }

    const fs::path out = ensure_out_dir(out_dir);
    auto csv = open_out(out / "ranking.csv");
    csv << "entity_id,score,rank\n";
    const std::size_t limit =
        top == 0 ? ranking.order.size() : std::min(top, ranking.order.size());
    for (std::size_t t = 0; t < limit; ++t) {
        const std::size_t e = ranking.order[t];
        csv << ids[e] << ','
            << format_double(static_cast<double>(ranking.orientation) *
                             ranking.scores[e])
            << ',' << t + 1 << '\n';
    }
    std::cout << "ranking written to " << (out / "ranking.csv").string() << " ("
              << limit << " rows, orientation "
              << (ranking.orientation > 0 ? "+1" : "-1") << ")\n";
    return 0;
}

int run_fold(const std::string& model_path, const std::string& triples,
             const std::string& out_dir, double lambda_a, char delimiter) {
    const LoadedModel lm = load_model(model_path);
    const fs::path sidecar =
        fs::path(model_path).parent_path() / lm.index_sidecar;
    const LoadedIndex idx = load_index(sidecar.string());

    const auto links =
        collect_fold_links(triples, idx.entities, idx.relations, delimiter);
    if (links.empty())
        throw EmptyInputError(triples + ": no new entities to fold in");

    FoldInSolver solver(lm.model, lambda_a);
    const fs::path out = ensure_out_dir(out_dir);
    auto csv = open_out(out / "folded.csv");
    csv << "entity_id";
    for (std::size_t c = 0; c < lm.model.rank(); ++c)
        csv << ",f" << c;
    csv << '\n';
    for (const auto& [id, link] : links) {
        csv << id;
        for (double x : solver.fold(link))
            csv << ',' << format_double(x);
        csv << '\n';
    }
    std::cout << links.size() << " entities folded into "
              << (out / "folded.csv").string() << '\n';
    return 0;
}

int run_synth(const SynthSpec& spec, const std::string& out_dir) {
    const SynthData data = generate_planted(spec);
    const fs::path out = ensure_out_dir(out_dir);
    write_triples((out / "triples.tsv").string(), data.tensor, data.entities,
                  data.relations);
    write_labels((out / "labels.tsv").string(), data.labels, data.entities);
    save_index((out / "index.json").string(), data.entities, data.relations);
    std::cout << "planted network: " << data.tensor.n_entities()
              << " entities, " << data.tensor.n_relations()
              << " relations, nnz " << data.tensor.nnz() << '\n'
              << "written to " << out.string() << '\n';
    return 0;
}

int run_evaluate(const CommonOpts& opt, const std::vector<double>& fractions_in,
                 std::size_t n_runs, const std::vector<std::size_t>& r_sweep,
                 const std::vector<std::size_t>& m_sweep) {
    const LoadedGraph g = load_triples(opt.triples, {opt.delimiter});
    const LabelLoad load = load_labels(opt.labels, g.entities, opt.delimiter);
    report_skipped(load);

    const bool do_rescal = opt.method == "rescal" || opt.method == "both";
    const bool do_class = opt.method == "class_rescal" || opt.method == "both";

    std::vector<double> fractions;
    for (double f : fractions_in)
        fractions.push_back(f > 1.0 ? f / 100.0 : f);

    const fs::path out = ensure_out_dir(opt.out_dir);
    auto runs_csv = open_out(out / "results_runs.csv");
    auto summary_csv = open_out(out / "results_summary.csv");
    auto pr_csv = open_out(out / "pr_curves.csv");

    runs_csv << "fraction,run";
    summary_csv << "fraction";
    if (do_rescal) {
        runs_csv << ",aupr_rescal";
        summary_csv << ",mean_aupr_rescal,stddev_aupr_rescal";
    }
    if (do_class) {
        runs_csv << ",aupr_class_rescal";
        summary_csv << ",mean_aupr_class_rescal,stddev_aupr_class_rescal";
    }
    runs_csv << '\n';
    summary_csv << '\n';
    pr_csv << "fraction,run,method,rank,recall,precision\n";

    auto dump_curves = [&](const EvalResult& res, const char* name) {
        for (std::size_t run = 0; run < res.runs.size(); ++run) {
            const auto& pts = res.runs[run].curve.points;
            for (std::size_t t = 0; t < pts.size(); ++t)
                pr_csv << format_double(res.train_fraction) << ',' << run << ','
                       << name << ',' << t + 1 << ','
                       << format_double(pts[t].first) << ','
                       << format_double(pts[t].second) << '\n';
        }
    };

    for (double fraction : fractions) {
        const SplitSpec split{fraction, n_runs, opt.params.seed};
        EvalResult res_rescal, res_class;
        if (do_rescal) {
            res_rescal =
                evaluate(g.tensor, load.labels, split, opt.params, Method::rescal);
            dump_curves(res_rescal, "rescal");
        }
        if (do_class) {
            res_class = evaluate(g.tensor, load.labels, split, opt.params,
                                 Method::class_rescal);
            dump_curves(res_class, "class_rescal");
        }
        for (std::size_t run = 0; run < n_runs; ++run) {
            runs_csv << format_double(fraction) << ',' << run;
            if (do_rescal)
                runs_csv << ',' << format_double(res_rescal.runs[run].aupr);
            if (do_class)
                runs_csv << ',' << format_double(res_class.runs[run].aupr);
            runs_csv << '\n';
        }
        summary_csv << format_double(fraction);
        if (do_rescal)
            summary_csv << ',' << format_double(res_rescal.mean_aupr) << ','
                        << format_double(res_rescal.stddev_aupr);
        if (do_class)
            summary_csv << ',' << format_double(res_class.mean_aupr) << ','
                        << format_double(res_class.stddev_aupr);
        summary_csv << '\n';

        std::cout << "fraction " << format_double(fraction) << ':';
        if (do_rescal)
            std::cout << " rescal mean AUPR " << format_double(res_rescal.mean_aupr);
        if (do_class)
            std::cout << " class_rescal mean AUPR "
                      << format_double(res_class.mean_aupr);
        std::cout << '\n';
    }

    // Sweeps run at the first requested fraction.
    if (!r_sweep.empty() || !m_sweep.empty()) {
        const SplitSpec split{fractions.front(), n_runs, opt.params.seed};
        const Method method =
            do_class ? Method::class_rescal : Method::rescal;
        if (!r_sweep.empty()) {
            auto csv = open_out(out / "sweep_factors.csv");
            csv << "r,mean_aupr,stddev_aupr\n";
            for (const auto& row : sweep_factors(g.tensor, load.labels, split,
                                                 opt.params, method, r_sweep))
                csv << row.value << ',' << format_double(row.mean_aupr) << ','
                    << format_double(row.stddev_aupr) << '\n';
        }
        if (!m_sweep.empty()) {
            auto csv = open_out(out / "sweep_relations.csv");
            csv << "m,mean_aupr,stddev_aupr\n";
            for (const auto& row : sweep_relations(g.tensor, load.labels, split,
                                                   opt.params, method, m_sweep))
                csv << row.value << ',' << format_double(row.mean_aupr) << ','
                    << format_double(row.stddev_aupr) << '\n';
        }
    }
    std::cout << "results written to " << out.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RESCAL / CLASS-RESCAL multi-relational factorization, "
                 "ranking and evaluation"};
    app.require_subcommand(1);

    CommonOpts fit_opt;
    auto* fit = app.add_subcommand("fit", "Factorize a triple file");
    fit->add_option("--triples", fit_opt.triples, "Triple TSV path")->required();
    fit->add_option("--labels", fit_opt.labels, "Label TSV path");
    fit->add_option("--method", fit_opt.method, "rescal or class_rescal")
        ->check(CLI::IsMember({"rescal", "class_rescal"}));
    fit->add_option("--out", fit_opt.out_dir, "Output directory");
    add_hyper_flags(fit, fit_opt.params);

    std::string rank_model, rank_labels, rank_fold;
    std::size_t rank_top = 0;
    std::string rank_out = ".";
    double rank_lambda_a = HyperParams{}.lambda_a;
    auto* rank = app.add_subcommand("rank", "Rank entities by factor score");
    rank->add_option("--model", rank_model, "Model JSON path")->required();
    rank->add_option("--labels", rank_labels, "Labels for score orientation");
    rank->add_option("--fold-triples", rank_fold,
                     "Rank unseen entities from this triple file instead");
    rank->add_option("--top", rank_top, "Emit only the best N rows");
    rank->add_option("--lambda-a", rank_lambda_a,
                     "Fold-in bracket regularization");
    rank->add_option("--out", rank_out, "Output directory");

    CommonOpts eval_opt;
    std::vector<double> fractions{10, 20, 30, 40};
    std::size_t n_runs = 10;
    std::vector<std::size_t> r_sweep, m_sweep;
    auto* evl = app.add_subcommand("evaluate",
                                   "Train/test sweep with fold-in ranking");
    evl->add_option("--triples", eval_opt.triples, "Triple TSV path")->required();
    evl->add_option("--labels", eval_opt.labels, "Label TSV path")->required();
    evl->add_option("--method", eval_opt.method,
                    "rescal, class_rescal or both")
        ->check(CLI::IsMember({"rescal", "class_rescal", "both"}));
    evl->add_option("--train-fractions", fractions,
                    "Training percentages (or fractions)")
        ->delimiter(',');
    evl->add_option("--runs", n_runs, "Random runs per fraction");
    evl->add_option("--r-sweep", r_sweep, "Factor counts to sweep")
        ->delimiter(',');
    evl->add_option("--m-sweep", m_sweep, "Relation prefixes to sweep")
        ->delimiter(',');
    evl->add_option("--out", eval_opt.out_dir, "Output directory");
    add_hyper_flags(evl, eval_opt.params);

    SynthSpec synth_spec;
    std::string synth_out = ".";
    auto* synth = app.add_subcommand("synth", "Generate a planted two-class network");
    synth->add_option("--entities-per-class", synth_spec.n_per_class,
                      "Entities per class");
    synth->add_option("--relations", synth_spec.n_relations, "Relation count");
    synth->add_option("--p-intra", synth_spec.p_intra,
                      "Intra-class edge probability");
    synth->add_option("--p-inter", synth_spec.p_inter,
                      "Inter-class edge probability");
    synth->add_option("--seed", synth_spec.seed, "Random seed");
    synth->add_option("--out", synth_out, "Output directory");

    std::string fold_model, fold_triples, fold_out = ".";
    double fold_lambda_a = HyperParams{}.lambda_a;
    auto* fold = app.add_subcommand("fold", "Project unseen entities into a model");
    fold->add_option("--model", fold_model, "Model JSON path")->required();
    fold->add_option("--triples", fold_triples,
                     "Triples linking new ids to trained ones")
        ->required();
    fold->add_option("--lambda-a", fold_lambda_a,
                     "Fold-in bracket regularization");
    fold->add_option("--out", fold_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*fit)
            return run_fit(fit_opt);
        if (*rank)
            return run_rank(rank_model, rank_labels, rank_fold, rank_top,
                            rank_out, rank_lambda_a, '\t');
        if (*evl)
            return run_evaluate(eval_opt, fractions, n_runs, r_sweep, m_sweep);
        if (*synth)
            return run_synth(synth_spec, synth_out);
        if (*fold)
            return run_fold(fold_model, fold_triples, fold_out, fold_lambda_a, '\t');
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
