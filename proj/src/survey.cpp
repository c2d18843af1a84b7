#include "annoserve/survey.hpp"

namespace annoserve {

namespace {

Option opt(std::string value, std::string display) {
  Option o;
  o.value = std::move(value);
  o.display = std::move(display);
  return o;
}

std::vector<AnnotationScheme> consent_questions() {
  AnnotationScheme q;
  q.name = kConsentQuestion;
  q.kind = SchemeKind::radio;
  q.description = "I have read the study information and agree to take part.";
  q.options = {opt(kConsentAgree, "I agree"), opt("decline", "I do not agree")};
  q.required = true;
  return {q};
}

std::vector<AnnotationScheme> demographic_questions() {
  AnnotationScheme age;
  age.name = "age";
  age.kind = SchemeKind::number;
  age.description = "What is your age?";
  age.required = false;

  AnnotationScheme gender;
  gender.name = "gender";
  gender.kind = SchemeKind::dropdown;
  gender.description = "What is your gender?";
  gender.options = {opt("woman", "Woman"), opt("man", "Man"), opt("non_binary", "Non-binary"),
                    opt("self_describe", "Prefer to self-describe"), opt("no_answer", "Prefer not to say")};
  gender.required = false;

  AnnotationScheme education;
  education.name = "education";
  education.kind = SchemeKind::dropdown;
  education.description = "What is the highest level of education you have completed?";
  education.options = {opt("secondary", "Secondary school"), opt("some_college", "Some college"),
                       opt("bachelor", "Bachelor's degree"), opt("graduate", "Graduate degree"),
                       opt("no_answer", "Prefer not to say")};
  education.required = false;

  AnnotationScheme language;
  language.name = "native_language";
  language.kind = SchemeKind::free_text;
  language.description = "What is your native language?";
  language.required = false;

  return {age, gender, education, language};
}

}  // namespace

std::vector<AnnotationScheme> survey_questions(const SurveyPage& page) {
  std::vector<AnnotationScheme> out;
  if (page.template_id == SurveyTemplate::consent) out = consent_questions();
  if (page.template_id == SurveyTemplate::demographics) out = demographic_questions();
  out.insert(out.end(), page.questions.begin(), page.questions.end());
  return out;
}

bool consent_declined(const SurveyPage& page, const Labels& answers) {
  if (page.template_id != SurveyTemplate::consent) return false;
  const auto it = answers.find(kConsentQuestion);
  if (it == answers.end()) return true;
  const auto* choice = std::get_if<Choice>(&it->second);
  return !choice || choice->value != kConsentAgree;
}

}  // namespace annoserve
