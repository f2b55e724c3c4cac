#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pman/corpus.hpp"

namespace pman {

enum class FieldRole { Passage, Question, Answer };

/// One literal block of a prompt. Blocks are joined with a newline.
/// `{passage}`, `{question}` and `{answer}` are slot markers.
struct PromptSection {
  std::string name;
  std::string text;
  bool cot_only = false;
};

struct PromptTemplate {
  enum class Kind { Assessment, Generation };

  Kind kind = Kind::Assessment;
  std::vector<PromptSection> sections;
  std::string version;

  /// The built-in templates, compiled in from assets/templates.
  static const PromptTemplate& assessment();
  static const PromptTemplate& generation();
};

/// Version string of the compiled-in template assets.
std::string_view template_version();

/// Breaks every delimiter sequence inside a field so the rendered prompt
/// keeps exactly one delimited region per field:
///   - runs of two or more '`' or '-' get a space between each character
///     ("```" -> "` ` `", "---" -> "- - -");
///   - '<' and '>' become '(' and ')';
///   - a field that starts or ends with its own fence character ('`' for
///     the passage, '-' for the answer) is padded with a space on that side
///     so it cannot merge with the fence.
/// All delimiter families are neutralized in every role: the prompt is one
/// flat string, and a "---" inside the passage would otherwise open a second
/// answer region.
/// Idempotent; text without delimiter characters is returned unchanged.
std::string sanitize_field(std::string_view text, FieldRole role);

/// Substitutes slots in a single left-to-right pass; substituted content is
/// never re-scanned for slot markers.
std::string render(const PromptTemplate& tpl, bool cot, std::string_view passage,
                   std::string_view question, std::string_view answer);

/// Assessment prompt for one sample (section C included iff `cot`).
std::string render_assessment(const Sample& sample, bool cot);

/// Question-generation prompt; ends with the literal cue "Question:".
std::string render_generation(std::string_view passage, std::string_view answer);

}  // namespace pman
