// Command-line front end: construct optimal designs, evaluate criteria,
// verify family conditions, enumerate design spaces and certify
// optimality claims by exhaustive search.
//
// Exit codes: 0 success, 1 a verification or certification reports
// "does not hold", 2 invalid input or exceeded budget.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcdesign/tcdesign.hpp"

namespace {

using namespace tcdesign;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<Count> parse_counts(const std::string& text) {
  std::vector<Count> out;
  for (const auto& item : split_list(text)) out.push_back(std::stoll(item));
  return out;
}

std::vector<Rational> parse_rationals(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& item : split_list(text)) out.push_back(parse_rational(item));
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return json::parse(in);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << bytes;
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

std::string csv_escape(const json& value) {
  std::string s = value.is_string() ? value.get<std::string>() : value.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

// Flat key,value rendering for report documents.
void emit_csv(const json& doc) {
  std::cout << "key,value\n";
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it->is_structured()) {
      for (auto inner = it->begin(); inner != it->end(); ++inner)
        std::cout << it.key() << "." << inner.key() << "," << csv_escape(*inner) << "\n";
    } else {
      std::cout << it.key() << "," << csv_escape(*it) << "\n";
    }
  }
}

struct SpaceArgs {
  int v = 0;
  int d = 0;
  std::string m_text;
  Count q = 0;

  std::vector<Count> block_sizes() const {
    if (!m_text.empty()) {
      auto m = parse_counts(m_text);
      if (d != 0 && static_cast<int>(m.size()) != d)
        throw std::invalid_argument("--m length disagrees with --d");
      return m;
    }
    if (q > 0) {
      if (d <= 0) throw std::invalid_argument("--q needs --d");
      return std::vector<Count>(d, q);
    }
    throw std::invalid_argument("give block sizes with --m or --q/--d");
  }
};

Criterion parse_criterion(const std::string& name) {
  if (name == "A") return Criterion::A;
  if (name == "MV") return Criterion::MV;
  if (name == "E") return Criterion::E;
  if (name == "R") return Criterion::R;
  if (name == "phiR") return Criterion::PhiR;
  if (name == "varcov") return Criterion::VarCovSum;
  if (name == "c") return Criterion::C;
  throw std::invalid_argument("unknown criterion '" + name + "'");
}

Family parse_family_conditions(const std::string& name) {
  if (name == "thm1") return Family::Thm1;
  if (name == "thm3") return Family::Thm3;
  if (name == "prop1") return Family::Prop1;
  if (name == "thm5") return Family::Thm5_BTIB;
  throw std::invalid_argument("unknown condition family '" + name + "'");
}

Claim parse_claim(const std::string& name) {
  if (name == "e-exact") return Claim::E_opt_exact;
  if (name == "varcov") return Claim::VarCovSum_min;
  if (name == "a-implies-r") return Claim::A_opt_is_R_opt;
  if (name == "e-c") return Claim::E_opt_c_opt;
  if (name == "prop1") return Claim::Prop1_E_opt;
  throw std::invalid_argument("unknown claim '" + name + "'");
}

double design_lambda_min(const AnyDesign& design) {
  return std::visit(
      [](const auto& d) {
        auto n = contrast_info(d);
        if constexpr (std::is_same_v<decltype(n), Matrix<Rational>>)
          return spectrum(to_double(n)).lambda_min;
        else
          return spectrum(n).lambda_min;
      },
      design);
}

int run_construct(const std::string& family, SpaceArgs& space, const std::string& s_text,
                  const std::string& out_path, const std::string& format) {
  AnyDesign design = [&]() -> AnyDesign {
    if (family == "e-exact") {
      auto m = space.block_sizes();
      return e_opt_exact(space.v, static_cast<int>(m.size()), m);
    }
    std::vector<Rational> s;
    if (!s_text.empty()) {
      s = parse_rationals(s_text);
      if (space.d != 0 && static_cast<int>(s.size()) != space.d)
        throw std::invalid_argument("--s length disagrees with --d");
    } else {
      if (space.d <= 0) throw std::invalid_argument("give block weights with --s or a count with --d");
      s.assign(space.d, make_rational(1, space.d));
    }
    const int d = static_cast<int>(s.size());
    if (family == "e-approx") return e_opt_approx(space.v, d, s);
    if (family == "a-approx") {
      std::vector<double> sd(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) sd[i] = to_double(s[i]);
      return a_opt_approx(space.v, sd);
    }
    throw std::invalid_argument("unknown family '" + family + "'");
  }();

  json doc{{"family", family}, {"design", to_json(design)}};
  doc["n_lambda_min"] = design_lambda_min(design);
  if (family == "e-exact") {
    const auto& exact = std::get<ExactDesign>(design);
    if (auto lambda = exact_lambda_min(contrast_info(exact)))
      doc["n_lambda_min_exact"] = to_string(*lambda);
  } else if (family == "e-approx") {
    if (auto lambda = exact_lambda_min(contrast_info(std::get<ApproxDesign<Rational>>(design))))
      doc["n_lambda_min_exact"] = to_string(*lambda);
  } else {
    doc["a_value"] = std::visit([](const auto& d) { return evaluate(d, Criterion::A).value; }, design);
  }
  if (!out_path.empty()) {
    if (format == "csv")
      write_file(out_path, to_csv(design));
    else
      write_file(out_path, to_json(design).dump(2) + "\n");
    doc["out"] = out_path;
  }
  emit(doc);
  return 0;
}

int run_evaluate(const std::string& design_path, const std::string& criterion_name,
                 const std::string& c_text, const std::string& format) {
  AnyDesign design = design_from_json(read_json_file(design_path));
  Criterion crit = parse_criterion(criterion_name);
  CriterionValue value;
  if (crit == Criterion::C) {
    if (c_text.empty()) throw std::invalid_argument("criterion c needs --c-vector");
    std::vector<Rational> c = parse_rationals(c_text);
    value = std::visit(
        [&](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ApproxDesign<double>>) {
            std::vector<double> cd(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) cd[i] = to_double(c[i]);
            return c_value(d, cd);
          } else {
            return c_value(d, c);
          }
        },
        design);
  } else {
    value = std::visit([&](const auto& d) { return evaluate(d, crit); }, design);
  }
  json doc = to_json(value);
  if (crit == Criterion::E && value.feasible) doc["n_lambda_min"] = design_lambda_min(design);
  if (format == "csv")
    emit_csv(doc);
  else
    emit(doc);
  return 0;
}

int run_verify(const std::string& design_path, const std::string& conditions, bool paper_literal,
               const std::string& format) {
  AnyDesign design = design_from_json(read_json_file(design_path));
  Family family = parse_family_conditions(conditions);
  GOptions opt{paper_literal};
  ConditionReport report;
  if (family == Family::Thm1) {
    // thm1 speaks about proportions; exact designs are normalized first
    // and real allocations are converted entry-exactly to rationals.
    report = std::visit(
        [&](const auto& d) -> ConditionReport {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, ExactDesign>) {
            return verify_conditions(normalize(d), family);
          } else if constexpr (std::is_same_v<D, ApproxDesign<double>>) {
            Matrix<Rational> table(d.v() + 1, d.d());
            for (int i = 0; i <= d.v(); ++i)
              for (int k = 0; k < d.d(); ++k) table(i, k) = rational_from_double(d(i, k));
            return verify_conditions(ApproxDesign<Rational>(std::move(table)), family);
          } else {
            return verify_conditions(d, family);
          }
        },
        design);
  } else {
    const auto* exact = std::get_if<ExactDesign>(&design);
    if (!exact)
      throw std::invalid_argument(std::string(family_name(family)) +
                                  " conditions apply to exact designs");
    report = verify_conditions(*exact, family, opt);
  }
  json doc = to_json(report);
  if (format == "csv")
    emit_csv(doc);
  else
    emit(doc);
  return report.satisfied ? 0 : 1;
}

int run_enumerate(SpaceArgs& space, long long budget, const std::string& out_path,
                  const std::string& format) {
  auto m = space.block_sizes();
  const int d = static_cast<int>(m.size());
  EnumerationSpace es = enumeration_space(space.v, d, m);
  if (!out_path.empty()) {
    DesignEnumerator en(space.v, d, m, budget);
    std::ostringstream lines;
    while (auto design = en.next()) lines << to_json(*design).dump() << "\n";
    write_file(out_path, lines.str());
  } else if (es.total > mpz_class(static_cast<long>(budget))) {
    throw BudgetExceededError("design space has " + es.total.get_str() +
                              " members, budget is " + std::to_string(budget));
  }
  json doc = to_json(es);
  if (!out_path.empty()) doc["out"] = out_path;
  if (format == "csv")
    emit_csv(doc);
  else
    emit(doc);
  return 0;
}

int run_certify(const std::string& claim_name_text, SpaceArgs& space, std::uint64_t seed,
                long long budget, bool paper_literal, const std::string& format) {
  auto m = space.block_sizes();
  const int d = static_cast<int>(m.size());
  CertifyOptions opt;
  opt.seed = seed;
  opt.budget = budget;
  opt.g_options.paper_literal = paper_literal;
  Certificate cert = certify(parse_claim(claim_name_text), space.v, d, m, opt);
  std::cerr << "certify " << claim_name_text << " finished in " << cert.wall_time_seconds
            << " s\n";
  json doc = to_json(cert, /*include_timing=*/false);
  if (format == "csv")
    emit_csv(doc);
  else
    emit(doc);
  return cert.holds ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal block designs for treatment-control comparisons"};
  app.require_subcommand(1);

  std::string family, criterion = "E", conditions, claim, design_path, s_text, c_text;
  std::string out_path, format = "json";
  SpaceArgs space;
  long long budget = 10'000'000;
  std::uint64_t seed = 0;
  bool paper_literal = false;

  auto add_space = [&](CLI::App* cmd, bool need_v) {
    auto* v_opt = cmd->add_option("--v", space.v, "number of test treatments");
    if (need_v) v_opt->required();
    cmd->add_option("--d", space.d, "number of blocks");
    cmd->add_option("--m", space.m_text, "comma-separated block sizes");
    cmd->add_option("--q", space.q, "common block size (with --d)");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", out_path, "write the design/stream to this file");
  };

  auto* construct = app.add_subcommand("construct", "build an optimal design family member");
  construct->add_option("--family", family, "e-approx | a-approx | e-exact")->required();
  add_space(construct, true);
  construct->add_option("--s", s_text, "comma-separated rational block weights");
  add_format(construct);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a design file under a criterion");
  evaluate_cmd->add_option("--design", design_path, "design JSON file")->required();
  evaluate_cmd->add_option("--criterion", criterion, "A | MV | E | R | phiR | varcov | c");
  evaluate_cmd->add_option("--c-vector", c_text, "contrast for criterion c (length v+1)");
  add_format(evaluate_cmd);

  auto* verify = app.add_subcommand("verify", "check family membership conditions");
  verify->add_option("--design", design_path, "design JSON file")->required();
  verify->add_option("--conditions", conditions, "thm1 | thm3 | prop1 | thm5")->required();
  verify->add_flag("--paper-literal-gh", paper_literal,
                   "use the printed-formula variants of g and h");
  add_format(verify);

  auto* enumerate_cmd = app.add_subcommand("enumerate", "enumerate a design space");
  add_space(enumerate_cmd, true);
  enumerate_cmd->add_option("--budget", budget, "maximum design count");
  add_format(enumerate_cmd);

  auto* certify_cmd = app.add_subcommand("certify", "certify an optimality claim by enumeration");
  certify_cmd->add_option("--claim", claim, "e-exact | varcov | a-implies-r | e-c | prop1")
      ->required();
  add_space(certify_cmd, true);
  certify_cmd->add_option("--seed", seed, "seed for sampled approximate designs");
  certify_cmd->add_option("--budget", budget, "maximum design count");
  certify_cmd->add_flag("--paper-literal-gh", paper_literal,
                        "use the printed-formula variants of g and h");
  add_format(certify_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (construct->parsed()) return run_construct(family, space, s_text, out_path, format);
    if (evaluate_cmd->parsed()) return run_evaluate(design_path, criterion, c_text, format);
    if (verify->parsed()) return run_verify(design_path, conditions, paper_literal, format);
    if (enumerate_cmd->parsed()) return run_enumerate(space, budget, out_path, format);
    if (certify_cmd->parsed())
      return run_certify(claim, space, seed, budget, paper_literal, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
