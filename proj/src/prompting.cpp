#include "pman/prompting.hpp"

#include "pman/embedded_templates.hpp"

namespace pman {

namespace {

bool is_fence_char(char c) { return c == '`' || c == '-'; }

PromptTemplate build(PromptTemplate::Kind kind, std::vector<PromptSection> sections) {
  PromptTemplate t;
  t.kind = kind;
  t.sections = std::move(sections);
  t.version = std::string(embedded::kTemplateVersion);
  return t;
}

}  // namespace

std::string_view template_version() { return embedded::kTemplateVersion; }

const PromptTemplate& PromptTemplate::assessment() {
  // Task description, CoT steps, verdict instruction, data block.
  static const PromptTemplate t = build(
      Kind::Assessment, {{"task", std::string(embedded::k_assessment_task), false},
                         {"cot", std::string(embedded::k_assessment_cot), true},
                         {"verdict", std::string(embedded::k_assessment_verdict), false},
                         {"data", std::string(embedded::k_assessment_data), false}});
  return t;
}

const PromptTemplate& PromptTemplate::generation() {
  static const PromptTemplate t =
      build(Kind::Generation, {{"generation", std::string(embedded::k_generation), false}});
  return t;
}

std::string sanitize_field(std::string_view text, FieldRole role) {
  std::string out;
  out.reserve(text.size() + 8);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '<') {
      out.push_back('(');
      continue;
    }
    if (c == '>') {
      out.push_back(')');
      continue;
    }
    out.push_back(c);
    if (is_fence_char(c) && i + 1 < text.size() && text[i + 1] == c) out.push_back(' ');
  }

  const char own = role == FieldRole::Passage ? '`' : role == FieldRole::Answer ? '-' : '\0';
  if (own != '\0' && !out.empty()) {
    if (out.front() == own) out.insert(out.begin(), ' ');
    if (out.back() == own) out.push_back(' ');
  }
  return out;
}

std::string render(const PromptTemplate& tpl, bool cot, std::string_view passage,
                   std::string_view question, std::string_view answer) {
  std::string joined;
  for (const auto& section : tpl.sections) {
    if (section.cot_only && !cot) continue;
    if (!joined.empty()) joined.push_back('\n');
    joined += section.text;
  }

  static constexpr std::string_view kSlots[] = {"{passage}", "{question}", "{answer}"};
  const std::string_view values[] = {passage, question, answer};

  std::string out;
  out.reserve(joined.size() + passage.size() + question.size() + answer.size());
  std::size_t pos = 0;
  while (pos < joined.size()) {
    bool matched = false;
    if (joined[pos] == '{') {
      for (std::size_t k = 0; k < 3; ++k) {
        if (joined.compare(pos, kSlots[k].size(), kSlots[k]) == 0) {
          out += values[k];
          pos += kSlots[k].size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(joined[pos++]);
  }
  return out;
}

std::string render_assessment(const Sample& sample, bool cot) {
  return render(PromptTemplate::assessment(), cot, sanitize_field(sample.passage, FieldRole::Passage),
                sanitize_field(sample.question, FieldRole::Question),
                sanitize_field(sample.answer, FieldRole::Answer));
}

std::string render_generation(std::string_view passage, std::string_view answer) {
  return render(PromptTemplate::generation(), false, sanitize_field(passage, FieldRole::Passage), {},
                sanitize_field(answer, FieldRole::Answer));
}

}  // namespace pman
