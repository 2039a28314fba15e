#ifndef UNIVAR_PROMPTS_HPP
#define UNIVAR_PROMPTS_HPP

#include <string>
#include <string_view>

namespace univar::prompts {

// Normative templates for the question-generation pipeline. The same text is
// shipped as editable files under prompts/; a test pins the two copies equal.

inline constexpr std::string_view kScenarioTemplate =
    "Create 50 scenarios highlighting the personal and regional variations in "
    "terms of `{VALUE}` in responses without specifying any region or country "
    "in the question.\n\n"
    "Formulate each scenario as a short and concise question. Aim for clarity "
    "and facilitate data augmentation. Make the examples natural and imagine "
    "the data is from online users. return the scenario questions in a "
    "numbered list format.";

inline constexpr std::string_view kQuestionFromScenarioTemplate =
    "Given a premise about \"{SITUATION}\", write a question asking whether "
    "the speaker should do or not do the aforementioned premise.'";

inline constexpr std::string_view kParaphraseTemplate =
    "Write 4 different paraphrased questions separated by a newline from the "
    "following question: \"{QUESTION}\"";

// Replaces every occurrence of {KEY} placeholders like {VALUE} in tmpl.
std::string fill(std::string_view tmpl, std::string_view placeholder,
                 std::string_view replacement);

}  // namespace univar::prompts

#endif
