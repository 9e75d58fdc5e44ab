#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "satlab/closure.hpp"
#include "satlab/dclab.hpp"
#include "satlab/error.hpp"
#include "satlab/json_io.hpp"
#include "satlab/operators.hpp"
#include "satlab/regularity.hpp"
#include "satlab/satclass.hpp"

using namespace satlab;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 1, kViolation = 2, kDisagreement = 3 };

struct Config {
  std::string gaps;
  std::string universe_file;
  std::string tmpl;
  std::string theta;
  std::string name = "F";
  int unfold_bound = 16;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> oracle_bound;
};

struct Run {
  Config cfg;
  GapUniverse u;
  OpPtr op;
  bool universe_given = false;

  void load_universe(const std::optional<json>& fallback = std::nullopt) {
    if (!cfg.universe_file.empty()) {
      u = universe_from_json(read_json_file(cfg.universe_file));
      universe_given = true;
    } else if (!cfg.gaps.empty()) {
      std::vector<std::string> labels;
      std::stringstream ss(cfg.gaps);
      for (std::string l; std::getline(ss, l, ',');)
        if (!l.empty()) labels.push_back(l);
      u = GapUniverse::make(labels);
      universe_given = true;
    } else if (fallback && fallback->contains("universe")) {
      u = universe_from_json(fallback->at("universe"));
    } else {
      u = GapUniverse::make({"g1", "g2", "g3"});
    }
  }

  Formula formula(const std::string& text) const { return parse_formula(text, &u); }

  void load_operator(bool required) {
    if (cfg.tmpl.empty()) {
      if (required) fail("config", "--template is required");
      return;
    }
    if (cfg.unfold_bound < 1) fail("config", "--unfold-bound must be positive");
    std::optional<Formula> th;
    if (!cfg.theta.empty()) th = formula(cfg.theta);
    op = Operator::create(cfg.name, Template::parse(cfg.tmpl), th, cfg.unfold_bound);
  }

  const Operator& need_op() const {
    if (!op) fail("config", "--template is required");
    return *op;
  }
};

void emit(const Config& cfg, const json& j) {
  std::string text = j.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(cfg.out);
  if (!o) fail("io", "cannot write " + cfg.out);
  o << text;
}

void emit_text(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(cfg.out);
  if (!o) fail("io", "cannot write " + cfg.out);
  o << text;
}

std::vector<int> gap_list(const GapUniverse& u, const std::vector<std::string>& labels) {
  std::vector<int> out;
  for (const auto& l : labels) {
    std::stringstream ss(l);
    for (std::string part; std::getline(ss, part, ',');)
      if (!part.empty()) out.push_back(u.gap_index(part));
  }
  return out;
}

json formula_json(Formula f, const GapUniverse& u) {
  json j;
  j["sexpr"] = to_sexpr(f, &u);
  j["infix"] = to_infix(f, &u);
  return j;
}

// A domain file is either a list of formulas (closed under cl) or a closed set.
ClosedSet load_domain(const Run& r, const std::string& path) {
  json j = read_json_file(path);
  if (j.is_array()) {
    std::vector<Formula> fs;
    for (const auto& e : j) fs.push_back(r.formula(e.get<std::string>()));
    ClosedSet c = cl(fs, r.op.get());
    return c;
  }
  if (j.contains("sentences")) {
    std::vector<Formula> fs;
    for (const auto& e : j.at("sentences")) fs.push_back(r.formula(e.get<std::string>()));
    return cl(fs, r.op.get());
  }
  return cl(closed_set_from_json(j, &r.u), r.op.get());
}

CutSpec cut_from_json(const json& j, const GapUniverse& u) {
  if (j.contains("below_gap")) return CutSpec::below_gap(u.gap_index(j.at("below_gap").get<std::string>()));
  if (j.contains("below")) return CutSpec::below(gap_from_json(j.at("below"), u));
  fail("json", "a cut needs below_gap or below");
}

CutSpec cut_from_text(const std::string& text, const GapUniverse& u) {
  GapNumber x = u.parse(text);
  if (!x.standard() && x.offset == 0) return CutSpec::below_gap(x.gap);
  return CutSpec::below(x);
}

ConstraintTheory load_theory(const Run& r, const std::string& path) {
  json j = read_json_file(path);
  ConstraintTheory th;
  th.op = r.op;
  try {
    if (j.contains("cut")) th.cut = cut_from_json(j.at("cut"), r.u);
    std::string mode = j.value("mode", std::string("trivial-above"));
    if (mode == "trivial-above") th.mode = AboveMode::TrivialAbove;
    else if (mode == "incorrect-above") th.mode = AboveMode::IncorrectAbove;
    else fail("json", "unknown mode '" + mode + "'");
    if (j.contains("base")) th.base = satclass_from_json(j.at("base"), r.u);
    if (j.contains("preserve")) {
      const json& p = j.at("preserve");
      if (p.is_array()) {
        std::vector<Formula> fs;
        for (const auto& e : p) fs.push_back(r.formula(e.get<std::string>()));
        th.preserve = cl(fs, r.op.get());
      } else {
        th.preserve = cl(closed_set_from_json(p, &r.u), r.op.get());
      }
    } else if (th.base) {
      th.preserve = th.base->domain();
    }
    if (j.contains("fixed"))
      for (const auto& e : j.at("fixed")) th.fixed.emplace_back(r.formula(e.at(0).get<std::string>()), e.at(1).get<bool>());
  } catch (const json::exception& e) {
    fail("json", std::string("malformed theory: ") + e.what());
  }
  return th;
}

SatClass load_class(Run& r, const std::string& path) {
  json j = read_json_file(path);
  if (!r.universe_given && j.contains("universe")) r.u = universe_from_json(j.at("universe"));
  return satclass_from_json(j.contains("class") ? j.at("class") : j, r.u);
}

std::vector<Formula> formulas(const Run& r, const std::vector<std::string>& texts) {
  std::vector<Formula> out;
  for (const auto& t : texts) out.push_back(r.formula(t));
  return out;
}

int report_status(const VerificationReport& rep) { return rep.ok ? kOk : kViolation; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satlab: satisfaction classes over gap universes"};
  app.require_subcommand(1);
  app.fallthrough();
  Run run;
  Config& cfg = run.cfg;
  app.add_option("--gaps", cfg.gaps, "comma-separated nonstandard gap labels, lowest first");
  app.add_option("--universe", cfg.universe_file, "universe JSON file")->check(CLI::ExistingFile);
  app.add_option("--template", cfg.tmpl, "operator template, e.g. \"(or q p)\"");
  app.add_option("--theta", cfg.theta, "base sentence of a local operator");
  app.add_option("--name", cfg.name, "operator name");
  app.add_option("--unfold-bound", cfg.unfold_bound, "standard iterates materialized up to this index");
  app.add_option("--out", cfg.out, "write the artifact here instead of stdout");
  app.add_option("--seed", cfg.seed, "seed recorded in randomized runs");
  app.add_option("--oracle-bound", cfg.oracle_bound, "candidate cap for the oracle");

  std::function<int()> action;
  auto on = [&](CLI::App* sub, std::function<int()> f) { sub->callback([&action, f] { action = f; }); };

  // parse
  auto* parse = app.add_subcommand("parse", "parse a formula and print its forms");
  std::string parse_text;
  parse->add_option("formula", parse_text)->required();
  on(parse, [&] {
    run.load_universe();
    run.load_operator(false);
    Formula f = run.formula(parse_text);
    json j = formula_json(f, run.u);
    j["sentence"] = is_sentence(f);
    j["free_vars"] = json::array();
    for (int v : free_vars(f)) j["free_vars"].push_back(var_name(v));
    j["size"] = f->has_piece ? nlohmann::json(nullptr) : nlohmann::json(f->size);
    if (f->has_piece) j["complexity"] = nullptr;
    else j["complexity"] = complexity(f);
    emit(cfg, j);
    return kOk;
  });

  // classify
  auto* classify = app.add_subcommand("classify", "classify and validate a template");
  on(classify, [&] {
    run.load_universe();
    run.load_operator(true);
    const Operator& f = run.need_op();
    json j;
    j["kind"] = to_string(f.cls().kind);
    j["accessible"] = f.accessible();
    j["additive"] = f.additive();
    j["q_monotone"] = f.q_monotone();
    j["local"] = f.local();
    j["complexity"] = f.depth();
    j["template"] = f.tmpl().to_string();
    j["warnings"] = f.warnings();
    if (f.local()) {
      json pos = json::array();
      for (PosClass c : classify_positions(f)) pos.push_back(to_string(c));
      j["positions"] = pos;
      j["theta"] = to_sexpr(f.theta(), &run.u);
    }
    emit(cfg, j);
    return kOk;
  });

  // iterate
  auto* iter = app.add_subcommand("iterate", "build F(x) or F(x, phi)");
  std::string iter_x, iter_phi;
  iter->add_option("--x", iter_x, "iterate index, e.g. 3 or g1+2")->required();
  iter->add_option("--phi", iter_phi, "base formula of a nonlocal operator");
  on(iter, [&] {
    run.load_universe();
    run.load_operator(true);
    std::optional<Formula> phi;
    if (!iter_phi.empty()) phi = run.formula(iter_phi);
    Formula f = iterate(run.need_op(), run.u.parse(iter_x), phi);
    json j = formula_json(f, run.u);
    j["size"] = f->has_piece ? nlohmann::json(nullptr) : nlohmann::json(f->size);
    emit(cfg, j);
    return kOk;
  });

  // closure
  auto* clo = app.add_subcommand("closure", "closure of a finite set, optionally Z_d");
  std::vector<std::string> clo_forms;
  std::string clo_input, clo_d;
  bool clo_dot = false;
  clo->add_option("formulas", clo_forms, "generators");
  clo->add_option("--input", clo_input, "JSON list of generators or a closed set")->check(CLI::ExistingFile);
  clo->add_option("--d", clo_d, "bound d for Z_d (additive operators)");
  clo->add_flag("--dot", clo_dot, "emit Graphviz instead of JSON");
  on(clo, [&] {
    run.load_universe();
    run.load_operator(false);
    ClosedSet z;
    if (!clo_input.empty()) z = load_domain(run, clo_input);
    ClosedSet g = cl(formulas(run, clo_forms), run.op.get());
    z = z.united(g);
    for (Formula f : g.generators()) z.add_generator(f);
    if (!clo_d.empty()) z = d_closure(z, run.u.parse(clo_d), run.need_op());
    if (clo_dot) emit_text(cfg, to_dot(z, run.op.get(), &run.u));
    else emit(cfg, to_json(z, &run.u));
    return kOk;
  });

  // template
  auto* tpl = app.add_subcommand("template", "structural template of a formula");
  std::string tpl_text;
  tpl->add_option("formula", tpl_text)->required();
  on(tpl, [&] {
    run.load_universe();
    run.load_operator(false);
    const StructuralTemplate& st = structural_template(run.formula(tpl_text));
    json j = formula_json(st.tmpl, run.u);
    json g = json::object();
    for (const auto& [v, t] : st.gamma) g[var_name(v)] = to_infix(t);
    j["gamma"] = g;
    emit(cfg, j);
    return kOk;
  });

  // build
  auto* build = app.add_subcommand("build", "satisfaction class builders");
  build->require_subcommand(1);

  auto* unique = build->add_subcommand("unique", "the unique pathological class");
  std::vector<std::string> j0, j1;
  unique->add_option("--j0", j0, "gaps where the iterate ray is true");
  unique->add_option("--j1", j1, "gaps where the iterate ray is false");
  std::int64_t std_upto = 0;
  unique->add_option("--std-upto", std_upto, "also include F(1..n)");
  on(unique, [&] {
    run.load_universe();
    run.load_operator(true);
    SatClass s = build_unique_pathological(run.need_op(), gap_list(run.u, j0), gap_list(run.u, j1), run.u, std_upto);
    VerificationReport rep = verify_comp(s);
    emit(cfg, {{"class", to_json(s)}, {"report", to_json(rep)}});
    return report_status(rep);
  });

  auto* constrained = build->add_subcommand("constrained", "extension under correctness constraints");
  std::string th_path, dom_path;
  constrained->add_option("--theory", th_path)->required()->check(CLI::ExistingFile);
  constrained->add_option("--domain", dom_path)->required()->check(CLI::ExistingFile);
  auto build_result = [&](const BuildResult& br) {
    json j;
    j["ok"] = br.ok;
    j["report"] = to_json(br.report);
    j["core"] = br.core;
    if (br.cls) j["class"] = to_json(*br.cls);
    emit(cfg, j);
    return br.ok ? kOk : kViolation;
  };
  on(constrained, [&] {
    run.load_universe();
    run.load_operator(false);
    ConstraintTheory th = load_theory(run, th_path);
    return build_result(extend_with_constraints(th, load_domain(run, dom_path), run.u));
  });

  auto* dneg = build->add_subcommand("doubleneg", "double-negation class, incorrect above the cut");
  std::string dn_th, dn_dom;
  dneg->add_option("--theory", dn_th)->required()->check(CLI::ExistingFile);
  dneg->add_option("--domain", dn_dom)->required()->check(CLI::ExistingFile);
  on(dneg, [&] {
    run.load_universe();
    run.load_operator(true);
    ConstraintTheory th = load_theory(run, dn_th);
    BuildResult br = extend_double_negation(th, load_domain(run, dn_dom), run.u);
    if (br.cls) br.report.merge(check_complementarity(*br.cls));
    br.ok = br.ok && br.report.ok;
    return build_result(br);
  });

  auto* brk = build->add_subcommand("break", "break correctness between two thresholds");
  std::string brk_class, brk_x, brk_phi, brk_d, brk_below = "g1";
  brk->add_option("--class", brk_class, "class to extend")->check(CLI::ExistingFile);
  brk->add_option("--x", brk_x, "domain file of X (defaults to the class domain)")->check(CLI::ExistingFile);
  brk->add_option("--phi", brk_phi, "sentence to include")->required();
  brk->add_option("--d", brk_d, "upper bound: a gap label or number")->required();
  brk->add_option("--below", brk_below, "thresholds lie above this cut");
  on(brk, [&] {
    std::optional<json> cj;
    if (!brk_class.empty()) cj = read_json_file(brk_class);
    run.load_universe(cj);
    run.load_operator(true);
    SatClass s(run.u);
    if (cj) s = satclass_from_json(cj->contains("class") ? cj->at("class") : *cj, run.u);
    ClosedSet x = brk_x.empty() ? s.domain() : load_domain(run, brk_x);
    BreakResult br = extend_break_correctness(run.need_op(), s, x, run.formula(brk_phi),
                                              cut_from_text(brk_d, run.u), cut_from_text(brk_below, run.u));
    json j;
    j["class"] = to_json(br.cls);
    j["d0"] = gap_to_json(br.d0, run.u);
    j["d1"] = gap_to_json(br.d1, run.u);
    j["theta"] = to_sexpr(br.theta, &run.u);
    j["witness"] = to_sexpr(br.witness, &run.u);
    j["report"] = to_json(br.report);
    emit(cfg, j);
    return report_status(br.report);
  });

  auto* reg = build->add_subcommand("regular", "regular class from gap sets");
  std::vector<std::string> reg_x, reg_fg;
  std::string reg_base;
  reg->add_option("--x-gaps", reg_x, "gaps in X; 'standard' for the standard segment");
  reg->add_option("--fg", reg_fg, "finitely many generating formulas")->required();
  reg->add_option("--base", reg_base, "class to preserve")->check(CLI::ExistingFile);
  on(reg, [&] {
    run.load_universe();
    run.load_operator(true);
    GapSet xs;
    for (int g : gap_list(run.u, reg_x)) xs.insert(g);
    std::optional<SatClass> base;
    if (!reg_base.empty()) base = load_class(run, reg_base);
    RegularResult rr = build_regular_class(run.need_op(), xs, formulas(run, reg_fg), base ? &*base : nullptr, run.u);
    emit(cfg, {{"class", to_json(rr.cls)}, {"report", to_json(rr.report)}});
    return report_status(rr.report);
  });

  // verify
  auto* verify = app.add_subcommand("verify", "check a class");
  verify->require_subcommand(1);
  std::string ver_class;
  auto* vcomp = verify->add_subcommand("comp", "compositional clauses");
  vcomp->add_option("--class", ver_class)->required()->check(CLI::ExistingFile);
  on(vcomp, [&] {
    run.load_universe();
    run.load_operator(false);
    SatClass s = load_class(run, ver_class);
    VerificationReport rep = verify_comp(s);
    emit(cfg, to_json(rep));
    return report_status(rep);
  });
  auto regular_check = [&] {
    run.load_universe();
    run.load_operator(false);
    SatClass s = load_class(run, ver_class);
    VerificationReport rep = is_regular(s);
    emit(cfg, to_json(rep));
    return report_status(rep);
  };
  auto* vreg = verify->add_subcommand("regular", "regularity against structural templates");
  vreg->add_option("--class", ver_class)->required()->check(CLI::ExistingFile);
  on(vreg, regular_check);
  auto* rcheck = app.add_subcommand("regular-check", "same as verify regular");
  rcheck->add_option("--class", ver_class)->required()->check(CLI::ExistingFile);
  on(rcheck, regular_check);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "enumerate classes and compare with the builder");
  std::string or_dom, or_th;
  std::size_t or_keep = 16;
  bool or_parity = false;
  oracle->add_option("--domain", or_dom)->required()->check(CLI::ExistingFile);
  oracle->add_option("--constraints", or_th)->required()->check(CLI::ExistingFile);
  oracle->add_option("--keep", or_keep, "solutions to retain");
  oracle->add_flag("--parity-rays", or_parity, "value ray parities independently");
  on(oracle, [&] {
    run.load_universe();
    run.load_operator(false);
    ConstraintTheory th = load_theory(run, or_th);
    ClosedSet d = load_domain(run, or_dom);
    OracleOptions opt = oracle_options_from_env();
    if (cfg.oracle_bound) opt.max_candidates = *cfg.oracle_bound;
    opt.keep = or_keep;
    opt.parity_rays = or_parity;
    OracleResult orr = brute_force_oracle(d, th, run.u, opt);
    BuildResult br = extend_with_constraints(th, d, run.u);
    bool agree = br.ok == (orr.solutions > 0);
    // Membership is decidable only when every solution was retained.
    if (agree && br.ok && orr.solutions <= orr.kept.size()) {
      bool found = false;
      for (const auto& k : orr.kept) found = found || same_values(k, *br.cls);
      agree = found;
    }
    json sols = json::array();
    for (const auto& k : orr.kept) sols.push_back(to_json(k));
    emit(cfg, {{"candidates", orr.candidates},
               {"solutions", orr.solutions},
               {"kept", sols},
               {"builder_ok", br.ok},
               {"agree", agree}});
    return agree ? kOk : kDisagreement;
  });

  // dclab
  auto* dc = app.add_subcommand("dclab", "disjunctive correctness experiments");
  dc->require_subcommand(1);
  std::string dc_class;
  std::vector<std::string> dc_seq;

  auto* sind = dc->add_subcommand("sind", "sequential induction along a sequence");
  sind->add_option("--class", dc_class)->required()->check(CLI::ExistingFile);
  sind->add_option("--seq", dc_seq, "sentences")->required();
  on(sind, [&] {
    run.load_universe();
    run.load_operator(false);
    SatClass s = load_class(run, dc_class);
    SIndResult r = sind_check(s, formulas(run, dc_seq));
    json j{{"holds", r.holds}, {"premise", r.premise}};
    j["break_index"] = r.break_index ? json(*r.break_index) : json(nullptr);
    emit(cfg, j);
    return r.holds ? kOk : kViolation;
  });

  auto* dcc = dc->add_subcommand("dc", "disjunctive correctness up to length c");
  std::string dc_c;
  dcc->add_option("--class", dc_class)->required()->check(CLI::ExistingFile);
  dcc->add_option("--c", dc_c)->required();
  on(dcc, [&] {
    run.load_universe();
    run.load_operator(false);
    SatClass s = load_class(run, dc_class);
    DCResult r = dc_check(s, run.u.parse(dc_c));
    json j{{"ok", r.ok}, {"checked", r.checked}};
    j["witness"] = r.witness ? json(to_sexpr(*r.witness, &run.u)) : json(nullptr);
    emit(cfg, j);
    return r.ok ? kOk : kViolation;
  });

  auto* stg = dc->add_subcommand("staging", "derivation closing disjunctive correctness under products");
  std::int64_t st_c = 2, st_b = 0;
  std::string st_values;
  stg->add_option("--c", st_c)->required();
  stg->add_option("--b", st_b)->required();
  stg->add_option("--seq", dc_seq, "disjuncts phi_0..phi_b")->required();
  stg->add_option("--class", dc_class, "class valuing the staging sentences")->check(CLI::ExistingFile);
  stg->add_option("--values", st_values, "T/F string giving the disjunct values instead of a class");
  on(stg, [&] {
    run.load_universe();
    run.load_operator(false);
    SentenceSequence seq = formulas(run, dc_seq);
    SatClass s(run.u);
    if (!dc_class.empty()) {
      s = load_class(run, dc_class);
    } else {
      if (st_values.size() != seq.size()) fail("config", "--values needs one T/F per disjunct");
      std::vector<bool> v;
      for (char ch : st_values) {
        if (ch != 'T' && ch != 'F') fail("config", "--values takes T and F only");
        v.push_back(ch == 'T');
      }
      s = staging_class(seq, v, run.u);
    }
    DerivationTrace t = multiplication_staging(s, st_c, st_b, seq);
    emit(cfg, to_json(t));
    return kOk;
  });

  auto* tree = dc->add_subcommand("tree", "correctness-tree labelling");
  std::string tr_a0, tr_phi;
  int tr_h = 1;
  tree->add_option("--a0", tr_a0, "root length")->required();
  tree->add_option("--height", tr_h)->required();
  tree->add_option("--phi", tr_phi)->required();
  tree->add_option("--class", dc_class, "class valuing the labels")->check(CLI::ExistingFile);
  on(tree, [&] {
    run.load_universe();
    run.load_operator(true);
    std::optional<SatClass> s;
    if (!dc_class.empty()) s = load_class(run, dc_class);
    auto a = halving_sequence(run.u.parse(tr_a0), tr_h, run.u);
    LabelledTree t = build_correctness_tree(run.need_op(), a, run.formula(tr_phi), tr_h, s ? &*s : nullptr);
    emit(cfg, to_json(t, &run.u));
    return t.alternative_failures.empty() ? kOk : kViolation;
  });

  // report
  auto* rep = app.add_subcommand("report", "correctness sets of a class");
  std::string rep_class;
  rep->add_option("--class", rep_class)->required()->check(CLI::ExistingFile);
  on(rep, [&] {
    run.load_universe();
    run.load_operator(true);
    SatClass s = load_class(run, rep_class);
    emit(cfg, to_json(correctness_sets(s, run.need_op())));
    return kOk;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  try {
    return action ? action() : kValidation;
  } catch (const Error& e) {
    std::cout << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump(2) << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cout << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump(2) << "\n";
    return kValidation;
  }
}
