#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hoa::testing {

std::string corpus_path(const std::string& name) {
  return std::string(HOA_TEST_CORPUS_DIR) + "/" + name;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AnnotatedProgram load_program(const std::string& text, const std::string& name) {
  ParseResult r = parse_program(text, name);
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += render(d) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(r.program);
}

AnnotatedProgram load_corpus(const std::string& name) {
  return load_program(read_text(corpus_path(name)), name);
}

Query make_query(const std::string& text, const AnnotatedProgram& program) {
  auto r = parse_query(text, program);
  if (!r.query) {
    std::string msg = "bad query " + text + "\n";
    for (const auto& d : r.diagnostics) msg += render(d) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.query);
}

MeaningTable fig1_meanings() {
  return {{"nneg", {PredKey{"p", 1}}}, {"neg", {PredKey{"n", 1}}}};
}

MeaningTable comparator_meanings() { return {{"comparator", {PredKey{"cmp3", 3}}}}; }

std::optional<Label> find_instance(const CheckContext& ctx,
                                   const std::function<bool(const LabeledInstance&)>& match) {
  for (const auto& inst : ctx.instances()) {
    if (match(inst)) return inst.label;
  }
  return std::nullopt;
}

std::optional<Label> program_instance(const CheckContext& ctx, std::size_t condition) {
  return find_instance(ctx, [&](const LabeledInstance& i) {
    return i.program_condition && *i.program_condition == condition;
  });
}

std::optional<Label> hyp_instance(const CheckContext& ctx, const std::string& predprop,
                                  const PredKey& pred) {
  return find_instance(ctx, [&](const LabeledInstance& i) {
    if (i.program_condition) return false;
    auto h = ctx.hypothesis(i.origin);
    return h && h->condition.hyp && h->condition.hyp->predprop == predprop &&
           h->condition.hyp->pred == pred;
  });
}

std::optional<Label> hyp_label(const CheckContext& ctx, const std::string& predprop,
                               const PredKey& pred) {
  for (std::uint32_t i = 1;; ++i) {
    auto h = ctx.hypothesis(Label::hyp(i));
    if (!h) return std::nullopt;
    if (h->condition.hyp && h->condition.hyp->predprop == predprop &&
        h->condition.hyp->pred == pred) {
      return h->label;
    }
  }
}

std::optional<std::size_t> condition_index(const AnnotatedProgram& program, const PredKey& pred,
                                           AssertionCondition::Kind kind,
                                           const std::string& fragment) {
  for (std::size_t i = 0; i < program.conditions.size(); ++i) {
    const auto& c = program.conditions[i];
    if (c.pred != pred || c.kind != kind) continue;
    std::string text = to_string(c.pre, VarStyle::Source) + " " + to_string(c.post, VarStyle::Source);
    if (text.find(fragment) != std::string::npos) return i;
  }
  return std::nullopt;
}

std::set<std::size_t> false_assertions(const Report& r) { return r.false_assertions(); }

}  // namespace hoa::testing
