#pragma once

#include <vector>

#include "annoserve/config.hpp"

namespace annoserve {

/// Name of the consent question contributed by the `consent` template.
inline constexpr const char* kConsentQuestion = "consent";
inline constexpr const char* kConsentAgree = "agree";

/// Built-in template questions (if any) followed by the page's own questions.
std::vector<AnnotationScheme> survey_questions(const SurveyPage& page);

/// True when the page carries the consent question and the answer is not
/// "agree".
bool consent_declined(const SurveyPage& page, const Labels& answers);

}  // namespace annoserve
