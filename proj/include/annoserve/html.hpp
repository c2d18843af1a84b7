#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/render.hpp"

namespace annoserve {

std::string html_escape(std::string_view text);

/// Plain-HTML page for a RenderModel, for clients without scripting. Forms
/// post back to /submit and /navigate.
std::string render_html(const RenderModel& model, const std::string& task_name,
                        const std::vector<std::string>& errors = {});

std::string login_page_html(const TaskConfig& config, const std::string& error = {});

/// Builds the labels object of a submission from HTML form fields named
/// `label.<scheme>` (repeated for multiselect), `label.<scheme>.best` /
/// `.worst`, and for spans `doc:start:end:label` entries separated by `;`.
nlohmann::json labels_from_form(const std::multimap<std::string, std::string>& fields,
                                const std::vector<AnnotationScheme>& schemes);

}  // namespace annoserve
