#pragma once

#include <string>
#include <vector>

// The magical-ball warm-up protocol: balls hold a number n in {1,2,3,4},
// encoded by uttering a keyword, and truthfully answer exactly one of two
// yes/no questions. The two keyword pairs (parity, magnitude) behave as
// conjugate bases, which makes the scripted 12-slot exchanges a faithful
// dry run of the photonic session.
namespace qkd::mbp {

// OD/EV split {1,2,3,4} by parity, M2/L3 by magnitude (more than 2 / less
// than 3); each keyword admits exactly two values.
enum class Keyword { OD, EV, M2, L3 };

// The two questions a ball will answer: "is n odd?" / "is n less than 3?".
enum class Question { OD, L3 };

const char* keyword_name(Keyword k);
const char* question_name(Question q);

bool keyword_allows(Keyword k, int n);

// key-bit convention: EV = M2 = 0, OD = L3 = 1
int keyword_bit(Keyword k);

// the question whose answer pins this keyword down deterministically
Question keyword_basis(Keyword k);

inline bool same_basis(Keyword k, Question q) { return keyword_basis(k) == q; }

// truthful evaluation of the question predicate on the encoded value
bool answer(Question q, int n);

// keyword implied by hearing `yes` in reply to `q`; an interceptor encodes
// her replacement ball with exactly this keyword
Keyword infer_keyword(Question q, bool yes);

inline int answer_bit(bool yes) { return yes ? 1 : 0; }

// One slot of a scripted exchange. The random choices (values picked by the
// balls, everyone's question picks) are pinned inputs; everything else is
// recomputed. eve_value is the value the replacement ball picks after Eve's
// measurement and must be consistent with her inferred keyword.
struct ScriptSlot {
    Keyword alice_keyword = Keyword::OD;
    int alice_value = 0;
    bool eve_present = false;
    Question eve_question = Question::OD;
    int eve_value = 0;
    Question bob_question = Question::OD;
};

struct SlotResult {
    int slot = 0; // 1-based, table convention
    int alice_bit = 0;
    bool eve_answer = false;      // valid iff eve_present
    Keyword eve_keyword = Keyword::OD; // inferred, valid iff eve_present
    bool bob_answer = false;
    int bob_bit = 0;
    bool kept = false;  // preparation and measurement bases coincide
    bool error = false; // kept but bits disagree
};

struct ScriptedRun {
    std::vector<SlotResult> slots;
    std::vector<int> kept_slots;
    std::vector<int> error_slots;
    std::string alice_key; // kept alice bits, slot order
    std::string bob_key;   // kept bob bits, slot order
    int errors = 0;
    int kept = 0;
};

// Throws std::invalid_argument on any (keyword, value) inconsistency,
// naming the slot.
ScriptedRun run_script(const std::vector<ScriptSlot>& script);

struct TablesReport {
    std::string text;
    std::vector<std::string> mismatches;
    bool ok = false;
};

// Recompute the three bundled reference tables (ball encoding, the clean
// 12-slot exchange, the intercepted exchange) from their scripted inputs and
// compare every derived cell against the pinned rows.
TablesReport reproduce_tables();

} // namespace qkd::mbp
