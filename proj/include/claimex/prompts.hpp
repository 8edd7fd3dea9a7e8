#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace claimex {

/// The six prompt templates the pipeline ships as text assets.
enum class PromptName {
    reference_eval,      // judge: generated-vs-reference similarity, 1-4
    entailment_eval,     // judge: 3-class faithfulness to the post
    decontext_eval,      // judge: 3-class stand-alone interpretability
    extract_text_only,   // extraction: text-only variant
    extract_image_text,  // extraction: image-text variant
    context_breakdown,   // intent/tone/context/visual_context stage
};

inline constexpr std::array<PromptName, 6> all_prompt_names = {
    PromptName::reference_eval,   PromptName::entailment_eval,
    PromptName::decontext_eval,   PromptName::extract_text_only,
    PromptName::extract_image_text, PromptName::context_breakdown,
};

std::string_view to_string(PromptName name);

/// Loads the template assets from a directory and pins them against the
/// shipped checksum manifest. Templates are stored and hashed in canonical
/// form: trailing whitespace stripped per line, exactly one trailing newline.
class PromptLibrary {
public:
    /// Throws Error(config) when a template is missing or fails its checksum.
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& text(PromptName name) const;
    const std::map<std::string, std::string>& checksums() const { return checksums_; }

    static std::string normalize(std::string_view text);
    static std::string checksum(std::string_view text);  // sha256 of normalized form

private:
    std::map<PromptName, std::string> texts_;
    std::map<std::string, std::string> checksums_;  // template name -> sha256
};

/// Replaces every occurrence of each placeholder. Placeholders absent from
/// the template are ignored.
std::string substitute(
    std::string_view tmpl,
    const std::vector<std::pair<std::string_view, std::string_view>>& replacements);

}  // namespace claimex
