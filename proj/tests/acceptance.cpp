// Acceptance harness: one PASS/FAIL line per criterion, exit status = number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus_oracle.hpp"
#include "gradient_oracle.hpp"
#include "metric_oracle.hpp"
#include "smiles_corpus.hpp"
#include "sogtok/analysis.hpp"
#include "sogtok/corpus.hpp"
#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"
#include "sogtok/metrics.hpp"
#include "sogtok/prompts.hpp"
#include "sogtok/scaffold.hpp"
#include "sogtok/smiles.hpp"
#include "sogtok/tokenizer.hpp"

using namespace sogtok;
using namespace sogtok::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const fs::path kWork = fs::path(SOGTOK_ACCEPTANCE_WORK_DIR);

// 1. analytic gradients against central differences of the frozen-selection surrogate
Outcome gradients() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Graph g = augment_with_global_node(random_graph(6, 0.4, rng));
    const Matrix A = build_adjacency(g);
    const Matrix X = random_matrix(7, 8, rng);
    Parameters p;
    p.encoder.W1 = random_matrix(8, 8, rng, 0.5);
    p.encoder.W2 = random_matrix(8, 4, rng, 0.5);
    p.decoder.Wd = random_matrix(4, 4, rng, 0.5);
    p.codebook.entries = random_matrix(4, 4, rng, 0.5);
    ForwardOptions fo;
    const Gradients gr = backward(forward(A, X, p, fo), p);
    std::vector<double> analytic;
    for (const Matrix* m : {&gr.W1, &gr.W2, &gr.Wd, &gr.codebook}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) analytic.push_back((*m)(i, j));
    }
    const OracleParams op{to_dense(p.encoder.W1), to_dense(p.encoder.W2), to_dense(p.decoder.Wd),
                          to_dense(p.codebook.entries)};
    const auto numeric =
        oracle_numeric_gradient(to_dense(A), to_dense(X), op, OracleOptions{fo.beta, true, false, true}, 1e-5);
    if (numeric.size() != analytic.size()) return fail("gradient size mismatch");
    for (std::size_t i = 0; i < numeric.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i]));
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3g", worst)};
}

// 2. quantize against exhaustive search
Outcome quantization() {
  Rng rng(77);
  std::size_t agree = 0;
  const std::size_t sizes[] = {2, 8, 64, 256, 512};
  for (std::size_t q = 0; q < 1000; ++q) {
    const std::size_t K = sizes[q % 5];
    const std::size_t d = 1 + rng.index(16);
    Codebook cb;
    cb.entries = random_matrix(K, d, rng);
    // duplicated rows exercise the lowest-index tie break
    if (q % 7 == 0) cb.entries.row(K - 1) = cb.entries.row(0);
    Matrix h = random_matrix(1, d, rng);
    if (q % 11 == 0) h.row(0) = cb.entries.row(K - 1);
    const auto sel = quantize(h, cb);
    const auto row = to_dense(h)[0];
    if (sel.indices[0] == oracle_nearest(row, to_dense(cb.entries))) ++agree;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 agree"};
}

// 3. synthetic family separation with default learning rates
Outcome families() {
  const auto set = synthetic_families(60, 7);
  TrainConfig cfg;
  cfg.model.dims.K = 16;
  cfg.model.seed = 7;
  cfg.warmup_epochs = 10;
  cfg.joint_epochs = 50;
  const TrainResult r = train(set.graphs, cfg);
  const double ratio = r.log.back().recon / r.log.front().recon;
  std::map<int, std::map<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < set.graphs.size(); ++i) {
    ++counts[set.family[i]][assign_token(set.graphs[i], r.model).graph_token.index];
  }
  double worst_purity = 1.0;
  std::set<std::size_t> dominant;
  for (const auto& [family, m] : counts) {
    std::size_t best = 0, total = 0, best_tok = 0;
    for (const auto& [tok, c] : m) {
      total += c;
      if (c > best) best = c, best_tok = tok;
    }
    dominant.insert(best_tok);
    worst_purity = std::min(worst_purity, static_cast<double>(best) / static_cast<double>(total));
  }
  const bool ok = ratio < 0.5 && worst_purity >= 0.8;
  return {ok, "recon final/epoch0 " + fmt("%.3f", ratio) + ", min family purity " + fmt("%.3f", worst_purity) +
                  ", distinct dominant tokens " + std::to_string(dominant.size()) + "/3, final utilization " +
                  fmt("%.4f", r.log.back().utilization)};
}

// 4. relabeling never changes the token of a strictly ranked graph
Outcome permutations() {
  TrainConfig cfg;
  cfg.model.seed = 4;
  cfg.warmup_epochs = 0;
  cfg.joint_epochs = 0;
  const TokenizerModel model = train(synthetic_families(2, 1).graphs, cfg).model;
  Rng rng(404);
  std::vector<Graph> strict;
  while (strict.size() < 50) {
    const Graph g = random_connected_graph(5 + rng.index(16), 0.25, rng, "s" + std::to_string(strict.size()));
    if (assign_attributes(g, model.config.strategy).strictly_ranked) strict.push_back(g);
  }
  // codebook seeded by k-means over the global rows so tokens are spread out
  TokenizerModel spread = model;
  Matrix rows(static_cast<Eigen::Index>(strict.size()), static_cast<Eigen::Index>(model.config.dims.d));
  for (std::size_t i = 0; i < strict.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = assign_token(strict[i], model).graph_embedding.transpose();
  }
  Rng km(derive_seed(4, "kmeans"));
  spread.params.codebook.entries = kmeans(rows, model.config.dims.K, 20, km);
  std::size_t same = 0;
  std::set<std::size_t> tokens;
  for (const auto& g : strict) {
    const auto base = assign_token(g, spread);
    tokens.insert(base.graph_token.index);
    for (int t = 0; t < 10; ++t) {
      const auto other = assign_token(permute(g, rng.permutation(g.num_nodes())), spread);
      if (other.graph_token == base.graph_token && other.graph_embedding == base.graph_embedding) ++same;
    }
  }
  return {same == 500, std::to_string(same) + "/500 identical (token and embedding), " +
                           std::to_string(tokens.size()) + " distinct tokens"};
}

// 200 decorated molecules over 10 ring scaffolds; X marks the substituent site
std::vector<Graph> scaffold_molecules() {
  const std::vector<std::string> cores{"c1ccccc1X",        "C1CCC2(CC1)CC2X",     "c1ccc2ccccc2c1X", "C1CCCC1X",
                                       "c1ccc(cc1)-c1ccccc1X", "C1CC1X",          "c1ccc(cc1)Cc1ccccc1X",
                                       "C1CCCCCC1X",       "C1CC2CCC1C2X",        "c1ccc2c(c1)CCC2X"};
  const std::vector<std::string> subs{"C", "CC", "O", "N", "CCC", "C(C)C", "OC", "CCO", "C(=O)O", "CN"};
  Rng rng(5);
  std::vector<Graph> out;
  for (std::size_t s = 0; s < cores.size(); ++s) {
    for (std::size_t i = 0; i < 20; ++i) {
      std::string smi = cores[s];
      std::string sub = subs[rng.index(subs.size())];
      if (rng.index(2)) sub += subs[rng.index(subs.size())];
      smi.replace(smi.find('X'), 1, sub);
      out.push_back(to_graph(parse_smiles(smi), "mol" + std::to_string(out.size())));
    }
  }
  return out;
}

// 5. scaffold purity against the shuffled baseline, default model settings
Outcome scaffolds() {
  const auto mols = scaffold_molecules();
  std::vector<Scaffold> sc;
  for (const auto& m : mols) sc.push_back(murcko_scaffold(m));
  const ScaffoldGrouping grouping = group_scaffolds(sc);
  TrainConfig cfg;
  cfg.model.seed = 7;
  cfg.warmup_epochs = 10;
  cfg.joint_epochs = 50;
  const TrainResult r = train(mols, cfg);
  std::vector<std::size_t> tokens;
  for (const auto& m : mols) tokens.push_back(assign_token(m, r.model).graph_token.index);
  const ScaffoldReport rep = scaffold_consistency(tokens, grouping.group_of, 1, 100);
  const std::set<std::size_t> distinct(tokens.begin(), tokens.end());
  return {rep.mean_purity >= 2.0 * rep.baseline_purity,
          "purity " + fmt("%.3f", rep.mean_purity) + " vs baseline " + fmt("%.3f", rep.baseline_purity) + ", " +
              std::to_string(grouping.group_count) + " scaffold groups, " + std::to_string(distinct.size()) +
              " distinct tokens"};
}

// 6. every record of a 500-record sample agrees with an independent recomputation
Outcome corpus() {
  Rng rng(66);
  Codebook cb;
  cb.entries = random_matrix(256, 16, rng);
  cb.entries.row(9) = cb.entries.row(3);
  const auto knn = gen_knn_records(cb, 5).records;
  const Dense C = to_dense(cb.entries);
  std::size_t ok = 0, total = 0;
  for (std::size_t i = 0; i < knn.size(); ++i, ++total) {
    if (knn[i].answer == oracle_knn_answer(C, i, 5)) ++ok;
  }

  std::vector<SimJudgeItem> items;
  std::map<std::string, std::vector<double>> stored;
  for (std::size_t i = 0; i < 60; ++i) {
    Vector e = Vector::Zero(8);
    const std::size_t cluster = i % 3;
    for (Eigen::Index c = 0; c < 8; ++c) e(c) = rng.normal(c == static_cast<Eigen::Index>(cluster) ? 3.0 : 0.0, 0.4);
    if (cluster == 2) e = -e;
    const std::string id = "e" + std::to_string(i);
    stored[id] = std::vector<double>(e.data(), e.data() + e.size());
    items.push_back({id, StructuralToken{i % 16}, e});
  }
  SimJudgeConfig sj;
  sj.budget = 144;
  sj.seed = 6;
  const auto sim = gen_simjudge_records(items, 16, sj).records;
  for (const auto& r : sim) {
    ++total;
    const double c = oracle_cosine(stored.at(r.provenance[0]), stored.at(r.provenance[1]));
    if ((r.answer == "similar" && c > sj.thresholds.tau_pos) || (r.answer == "dissimilar" && c < sj.thresholds.tau_neg)) ++ok;
  }

  std::vector<Graph> graphs;
  std::vector<TokenAssignment> assigned;
  while (total + graphs.size() < 500) {
    graphs.push_back(random_graph(1 + rng.index(30), 0.15, rng, "d" + std::to_string(graphs.size())));
    TokenAssignment a;
    a.graph_id = graphs.back().id();
    a.graph_token = StructuralToken{rng.index(256)};
    assigned.push_back(a);
  }
  const auto desc = gen_descmatch_records(graphs, assigned, ImportanceStrategy::degree());
  for (std::size_t i = 0; i < desc.size(); ++i, ++total) {
    if (descmatch_round_trips(desc[i], graphs[i], ImportanceStrategy::degree()) &&
        desc[i].answer == assigned[i].graph_token.surface())
      ++ok;
  }
  return {ok == total && total == 500, std::to_string(ok) + "/" + std::to_string(total) + " records verified (" +
                                           std::to_string(knn.size()) + " knn, " + std::to_string(sim.size()) +
                                           " simjudge, " + std::to_string(desc.size()) + " descmatch)"};
}

// 7. shipped templates reproduce the stored golden prompts
Outcome golden_prompts() {
  const auto reg = TemplateRegistry::load_default();
  const Graph mol = to_graph(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), "aspirin");
  std::size_t ok = 0, total = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(SOGTOK_TEST_DIR) / "golden" / "prompts")) {
    ++total;
    const auto& tmpl = reg.get(entry.path().stem().string());
    if (render_prompt(tmpl, mol, StructuralToken{42}).prompt == read_file(entry.path().string())) ++ok;
  }
  return {ok == 17 && total == 17, std::to_string(ok) + "/" + std::to_string(total) + " byte-identical"};
}

// 8. metric formulas against pairwise and hand oracles
Outcome metrics() {
  Rng rng(88);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? rng.uniform() : static_cast<double>(rng.index(5));
      l[i] = static_cast<int>(rng.index(2));
    }
    l[0] = 0;
    l[1] = 1;
    const double want = oracle_auc(s, l);
    worst = std::max(worst, std::abs(auc_roc(s, l) - want) / want);
  }
  const std::vector<double> ws{0.9, 0.8, 0.3, 0.2};
  const std::vector<int> wl{1, 0, 1, 0};
  const double worked = auc_roc(ws, wl);

  const PhraseSets ph = default_phrase_sets();
  const std::vector<std::pair<const char*, AnswerValue>> suite{
      {"True", AnswerValue::kPositive},
      {"False", AnswerValue::kNegative},
      {"not approved", AnswerValue::kNegative},
      {"The drug is approved? No.", AnswerValue::kNegative},
      {"inactive", AnswerValue::kNegative},
      {"Yes, active", AnswerValue::kPositive},
      {"TRUE or FALSE", AnswerValue::kNegative},
      {"It was rejected, though true to form", AnswerValue::kNegative},
      {"ACTIVE", AnswerValue::kPositive},
      {"unclear", AnswerValue::kUnknown},
      {"", AnswerValue::kUnknown},
  };
  std::size_t parsed_ok = 0;
  for (const auto& [text, want] : suite) parsed_ok += parse_answer(text, ph).value == want;

  const std::vector<int> p{1, 1, 0, 0};
  const std::vector<int> lab{1, 0, 1, 0};
  const auto rep = accuracy_and_f1(p, lab, 2);
  const bool ok = worst < 1e-12 && worked == 0.75 && parsed_ok == suite.size() && rep.micro_f1 == 0.5 &&
                  rep.f1 == 0.5;
  return {ok, "auc max rel error " + fmt("%.3g", worst) + ", worked example " + fmt("%.4g", worked) + ", parser " +
                  std::to_string(parsed_ok) + "/" + std::to_string(suite.size()) + ", micro-F1 " +
                  fmt("%.4g", rep.micro_f1)};
}

// 9. SMILES corpus counts and error positions
Outcome parser() {
  std::size_t ok = 0;
  for (const auto& e : kCorpus) {
    const auto m = parse_smiles(e.smiles);
    ok += m.atoms.size() == e.atoms && m.bonds.size() == e.bonds && ring_count(m) == e.rings;
  }
  struct Bad {
    const char* smiles;
    ErrorCode code;
    std::size_t column;
  };
  const Bad bad[] = {{"C1CC", ErrorCode::kUnclosedRing, 1},
                     {"CC(C", ErrorCode::kUnbalancedBranch, 2},
                     {"CC)C", ErrorCode::kUnbalancedBranch, 2},
                     {"CXC", ErrorCode::kUnsupportedToken, 1}};
  std::size_t errors_ok = 0;
  for (const auto& b : bad) {
    try {
      parse_smiles(b.smiles);
    } catch (const Error& e) {
      errors_ok += e.code() == b.code && e.column() == b.column;
    }
  }
  const std::size_t n = sizeof kCorpus / sizeof kCorpus[0];
  return {ok == n && errors_ok == 4, std::to_string(ok) + "/" + std::to_string(n) + " molecules, " +
                                         std::to_string(errors_ok) + "/4 error cases"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SOGTOK_CLI_PATH) + " " + args + " > " + (kWork / "cli.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// 10. every subcommand replays to byte-identical outputs
Outcome determinism() {
  fs::remove_all(kWork / "cli");
  fs::create_directories(kWork / "cli");
  const fs::path d = kWork / "cli";
  std::vector<Graph> mols;
  std::string labels = "id,label\n";
  std::size_t i = 0;
  for (auto m : scaffold_molecules()) {
    if (i >= 40) break;
    labels += m.id() + "," + std::to_string(i % 3 == 0) + "\n";
    mols.push_back(m);
    ++i;
  }
  write_file((d / "mols.jsonl").string(), format_graph_file(mols));
  write_file((d / "labels.csv").string(), labels);
  std::string responses;
  for (const auto& m : mols) responses += "{\"id\":\"" + m.id() + "\",\"text\":\"" + (m.id().size() % 2 ? "True" : "False") + "\"}\n";
  write_file((d / "responses.jsonl").string(), responses);

  const std::vector<std::pair<std::string, std::string>> steps{
      {"train", "train --data " + q(d / "mols.jsonl") + " --out " + q(d / "model.ckpt") +
                    " --seed 3 --k 16 --warmup-epochs 2 --epochs 3"},
      {"tokenize", "tokenize --checkpoint " + q(d / "model.ckpt") + " --data " + q(d / "mols.jsonl") + " --out " +
                       q(d / "tokens.tsv") + " --jobs 3"},
      {"gen-corpus", "gen-corpus --checkpoint " + q(d / "model.ckpt") + " --data " + q(d / "mols.jsonl") +
                         " --out " + q(d / "corpus.jsonl") + " --seed 5 --budget 20"},
      {"gen-prompts", "gen-prompts --checkpoint " + q(d / "model.ckpt") + " --data " + q(d / "mols.jsonl") +
                          " --labels " + q(d / "labels.csv") + " --task BBBP_p_np --balance 1:1 --seed 5 --out " +
                          q(d / "prompts")},
      {"eval", "eval --responses " + q(d / "responses.jsonl") + " --labels " + q(d / "labels.csv") +
                   " --task BBBP_p_np --out " + q(d / "metrics.csv")},
      {"stats", "stats --checkpoint " + q(d / "model.ckpt") + " --data " + q(d / "mols.jsonl") + " --seed 5 --out " +
                    q(d / "stats")},
  };
  const std::vector<fs::path> manifests{d / "model.ckpt.manifest.json", d / "tokens.tsv.manifest.json",
                                        d / "corpus.jsonl.manifest.json", d / "prompts" / "manifest.json",
                                        d / "metrics.csv.manifest.json", d / "stats" / "manifest.json"};
  std::size_t replayed = 0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    if (const int rc = run_cli(steps[s].second); rc != 0) {
      return fail(steps[s].first + " exited with " + std::to_string(rc) + ": " + read_file((kWork / "cli.log").string()));
    }
    if (run_cli("replay --manifest " + q(manifests[s])) == 0) ++replayed;
  }
  return {replayed == steps.size(), std::to_string(replayed) + "/" + std::to_string(steps.size()) +
                                        " subcommands replay byte-identically"};
}

// 11. vocabulary and anchor sweeps complete and write one comparable report
Outcome sweeps() {
  const auto set = synthetic_families(60, 7);
  std::string report = "config,K,anchor,recon_epoch0,recon_final,utilization,dead_entries,distinct_tokens,permutation_rate\n";
  std::size_t rows = 0;
  auto run = [&](const std::string& name, std::size_t K, const ImportanceStrategy& strategy) {
    TrainConfig cfg;
    cfg.model.dims.K = K;
    cfg.model.seed = 7;
    cfg.model.strategy = strategy;
    cfg.warmup_epochs = 10;
    cfg.joint_epochs = 50;
    const TrainResult r = train(set.graphs, cfg);
    std::set<std::size_t> distinct;
    for (const auto& a : assign_tokens(set.graphs, r.model, 4)) distinct.insert(a.graph_token.index);
    const auto perm = permutation_consistency(r.model, std::span<const Graph>(set.graphs).subspan(0, 30), 3, 9);
    std::ostringstream row;
    row << name << ',' << K << ',' << strategy.name() << ',' << fmt("%.9g", r.log.front().recon) << ','
        << fmt("%.9g", r.log.back().recon) << ',' << fmt("%.9g", r.log.back().utilization) << ','
        << r.log.back().dead_entries << ',' << distinct.size() << ',' << fmt("%.9g", perm.rate) << '\n';
    report += row.str();
    ++rows;
  };
  for (std::size_t K : {64, 128, 256, 512}) run("vocab", K, ImportanceStrategy::degree());
  for (const auto& s : {ImportanceStrategy::degree(), ImportanceStrategy::pagerank(),
                        ImportanceStrategy::betweenness(), ImportanceStrategy::random(7)})
    run("anchor", 256, s);
  const fs::path out = kWork / "sweep_report.csv";
  write_file(out.string(), report);
  return {rows == 8, std::to_string(rows) + "/8 configurations, report " + out.string()};
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},          {"quantization oracle", quantization},
      {"synthetic family separation", families},    {"permutation consistency", permutations},
      {"scaffold consistency", scaffolds},          {"corpus fidelity", corpus},
      {"prompt golden files", golden_prompts},      {"metric oracles", metrics},
      {"SMILES parser suite", parser},              {"determinism", determinism},
      {"config sweeps", sweeps},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
