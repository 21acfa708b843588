#include "qkdlab/mbp.hpp"

#include <sstream>
#include <stdexcept>

namespace qkd::mbp {

const char* keyword_name(Keyword k) {
    switch (k) {
        case Keyword::OD: return "OD";
        case Keyword::EV: return "EV";
        case Keyword::M2: return "M2";
        case Keyword::L3: return "L3";
    }
    return "??";
}

const char* question_name(Question q) { return q == Question::OD ? "nOD" : "nL3"; }

bool keyword_allows(Keyword k, int n) {
    if (n < 1 || n > 4) return false;
    switch (k) {
        case Keyword::OD: return n % 2 == 1;
        case Keyword::EV: return n % 2 == 0;
        case Keyword::M2: return n > 2;
        case Keyword::L3: return n < 3;
    }
    return false;
}

int keyword_bit(Keyword k) { return (k == Keyword::OD || k == Keyword::L3) ? 1 : 0; }

Question keyword_basis(Keyword k) {
    return (k == Keyword::OD || k == Keyword::EV) ? Question::OD : Question::L3;
}

bool answer(Question q, int n) { return q == Question::OD ? n % 2 == 1 : n < 3; }

Keyword infer_keyword(Question q, bool yes) {
    if (q == Question::OD) return yes ? Keyword::OD : Keyword::EV;
    return yes ? Keyword::L3 : Keyword::M2;
}

ScriptedRun run_script(const std::vector<ScriptSlot>& script) {
    ScriptedRun run;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const ScriptSlot& s = script[i];
        const int slot = static_cast<int>(i) + 1;
        if (!keyword_allows(s.alice_keyword, s.alice_value)) {
            std::ostringstream os;
            os << "slot " << slot << ": value " << s.alice_value << " does not satisfy keyword "
               << keyword_name(s.alice_keyword);
            throw std::invalid_argument(os.str());
        }

        SlotResult r;
        r.slot = slot;
        r.alice_bit = keyword_bit(s.alice_keyword);

        int ball_value = s.alice_value;
        if (s.eve_present) {
            r.eve_answer = answer(s.eve_question, s.alice_value);
            r.eve_keyword = infer_keyword(s.eve_question, r.eve_answer);
            if (!keyword_allows(r.eve_keyword, s.eve_value)) {
                std::ostringstream os;
                os << "slot " << slot << ": replacement value " << s.eve_value
                   << " does not satisfy inferred keyword " << keyword_name(r.eve_keyword);
                throw std::invalid_argument(os.str());
            }
            ball_value = s.eve_value;
        }

        r.bob_answer = answer(s.bob_question, ball_value);
        r.bob_bit = answer_bit(r.bob_answer);
        r.kept = same_basis(s.alice_keyword, s.bob_question);
        r.error = r.kept && r.alice_bit != r.bob_bit;

        if (r.kept) {
            run.kept_slots.push_back(slot);
            run.alice_key.push_back(static_cast<char>('0' + r.alice_bit));
            run.bob_key.push_back(static_cast<char>('0' + r.bob_bit));
            ++run.kept;
            if (r.error) {
                run.error_slots.push_back(slot);
                ++run.errors;
            }
        }
        run.slots.push_back(r);
    }
    return run;
}

namespace {

constexpr int kSlots = 12;

// reference exchange shared by all three tables
constexpr Keyword kAliceKeywords[kSlots] = {
    Keyword::OD, Keyword::M2, Keyword::L3, Keyword::EV, Keyword::L3, Keyword::M2,
    Keyword::EV, Keyword::EV, Keyword::L3, Keyword::EV, Keyword::OD, Keyword::M2,
};
constexpr int kTable1Values[kSlots] = {3, 4, 2, 2, 1, 3, 4, 2, 1, 4, 1, 3};

constexpr Question kBobQuestions[kSlots] = {
    Question::OD, Question::OD, Question::L3, Question::OD, Question::L3, Question::L3,
    Question::L3, Question::OD, Question::OD, Question::L3, Question::OD, Question::L3,
};
constexpr bool kTable2Answers[kSlots] = {true,  false, true,  false, true,  false,
                                         false, false, true,  false, true,  false};
constexpr int kTable2Bits[kSlots] = {1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0};
constexpr int kKeptSlots[] = {1, 3, 4, 5, 6, 8, 11, 12};
constexpr const char* kTable2Key = "11010010";

// The intercepted run reuses the same keywords but the balls re-picked their
// values; the pinned answers force every value except in slots 1, 2, 3 and
// 10, where either choice matches and the table-1 value is used.
constexpr int kTable3Values[kSlots] = {3, 4, 2, 2, 1, 4, 4, 2, 1, 4, 1, 3};
constexpr Question kEveQuestions[kSlots] = {
    Question::OD, Question::L3, Question::L3, Question::L3, Question::OD, Question::OD,
    Question::L3, Question::L3, Question::OD, Question::OD, Question::L3, Question::OD,
};
constexpr bool kTable3EveAnswers[kSlots] = {true, false, true, true,  true, false,
                                            false, true, true, false, true, true};
constexpr int kTable3EveValues[kSlots] = {3, 3, 1, 2, 3, 4, 4, 1, 1, 2, 2, 3};
constexpr bool kTable3BobAnswers[kSlots] = {true,  true,  true, false, false, false,
                                            false, true,  true, true,  false, false};
constexpr int kTable3BobBits[kSlots] = {1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 0};
constexpr int kTable3ErrorSlots[] = {5, 8, 11};

std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

void row(std::ostringstream& os, const std::string& label, const std::vector<std::string>& cells) {
    os << pad(label, 14) << " |";
    for (const auto& c : cells) os << pad(c, 4);
    os << "\n";
}

template <typename F>
std::vector<std::string> cells(F f) {
    std::vector<std::string> v;
    for (int i = 0; i < kSlots; ++i) v.push_back(f(i));
    return v;
}

void mismatch(TablesReport& rep, const std::string& where, const std::string& expected,
              const std::string& got) {
    rep.mismatches.push_back(where + ": expected " + expected + ", computed " + got);
}

std::string join(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

std::string yn(bool b) { return b ? "Yes" : "No"; }

} // namespace

TablesReport reproduce_tables() {
    TablesReport rep;
    std::ostringstream os;

    os << "Table 1: ball encoding\n";
    row(os, "slot", cells([](int i) { return std::to_string(i + 1); }));
    row(os, "keyword", cells([](int i) { return std::string(keyword_name(kAliceKeywords[i])); }));
    row(os, "value", cells([](int i) { return std::to_string(kTable1Values[i]); }));
    for (int i = 0; i < kSlots; ++i) {
        if (!keyword_allows(kAliceKeywords[i], kTable1Values[i]))
            mismatch(rep, "table 1 slot " + std::to_string(i + 1),
                     std::string("value satisfying ") + keyword_name(kAliceKeywords[i]),
                     std::to_string(kTable1Values[i]));
    }
    os << "  every value satisfies its keyword\n\n";

    os << "Table 2: clean exchange\n";
    std::vector<ScriptSlot> clean;
    for (int i = 0; i < kSlots; ++i) {
        ScriptSlot s;
        s.alice_keyword = kAliceKeywords[i];
        s.alice_value = kTable1Values[i];
        s.bob_question = kBobQuestions[i];
        clean.push_back(s);
    }
    const ScriptedRun r2 = run_script(clean);
    row(os, "slot", cells([](int i) { return std::to_string(i + 1); }));
    row(os, "keyword", cells([](int i) { return std::string(keyword_name(kAliceKeywords[i])); }));
    row(os, "value", cells([](int i) { return std::to_string(kTable1Values[i]); }));
    row(os, "question", cells([](int i) { return std::string(question_name(kBobQuestions[i])); }));
    row(os, "answer", cells([&](int i) { return yn(r2.slots[i].bob_answer); }));
    row(os, "bit (bob)", cells([&](int i) { return std::to_string(r2.slots[i].bob_bit); }));
    row(os, "kept", cells([&](int i) { return std::string(r2.slots[i].kept ? "*" : ""); }));
    for (int i = 0; i < kSlots; ++i) {
        const std::string at = "table 2 slot " + std::to_string(i + 1);
        if (r2.slots[i].bob_answer != kTable2Answers[i])
            mismatch(rep, at + " answer", yn(kTable2Answers[i]), yn(r2.slots[i].bob_answer));
        if (r2.slots[i].bob_bit != kTable2Bits[i])
            mismatch(rep, at + " bit", std::to_string(kTable2Bits[i]),
                     std::to_string(r2.slots[i].bob_bit));
    }
    const std::vector<int> kept_ref(std::begin(kKeptSlots), std::end(kKeptSlots));
    if (r2.kept_slots != kept_ref)
        mismatch(rep, "table 2 kept slots", join(kept_ref), join(r2.kept_slots));
    if (r2.bob_key != kTable2Key) mismatch(rep, "table 2 key", kTable2Key, r2.bob_key);
    if (r2.alice_key != r2.bob_key)
        mismatch(rep, "table 2 alice/bob keys", r2.alice_key, r2.bob_key);
    os << "  kept slots: " << join(r2.kept_slots) << "\n";
    os << "  key: " << r2.bob_key << "\n\n";

    os << "Table 3: intercepted exchange\n";
    std::vector<ScriptSlot> tapped;
    for (int i = 0; i < kSlots; ++i) {
        ScriptSlot s;
        s.alice_keyword = kAliceKeywords[i];
        s.alice_value = kTable3Values[i];
        s.eve_present = true;
        s.eve_question = kEveQuestions[i];
        s.eve_value = kTable3EveValues[i];
        s.bob_question = kBobQuestions[i];
        tapped.push_back(s);
    }
    const ScriptedRun r3 = run_script(tapped);
    row(os, "slot", cells([](int i) { return std::to_string(i + 1); }));
    row(os, "bit (alice)", cells([&](int i) { return std::to_string(r3.slots[i].alice_bit); }));
    row(os, "eve question", cells([](int i) { return std::string(question_name(kEveQuestions[i])); }));
    row(os, "eve answer", cells([&](int i) { return yn(r3.slots[i].eve_answer); }));
    row(os, "value m", cells([](int i) { return std::to_string(kTable3EveValues[i]); }));
    row(os, "bob question", cells([](int i) { return std::string(question_name(kBobQuestions[i])); }));
    row(os, "bob answer", cells([&](int i) { return yn(r3.slots[i].bob_answer); }));
    row(os, "bit (bob)", cells([&](int i) { return std::to_string(r3.slots[i].bob_bit); }));
    row(os, "kept", cells([&](int i) {
            return std::string(r3.slots[i].error ? "x" : (r3.slots[i].kept ? "*" : ""));
        }));
    for (int i = 0; i < kSlots; ++i) {
        const std::string at = "table 3 slot " + std::to_string(i + 1);
        // alice's bit row repeats the table-2 bit pattern (same keywords)
        if (r3.slots[i].alice_bit != kTable2Bits[i])
            mismatch(rep, at + " alice bit", std::to_string(kTable2Bits[i]),
                     std::to_string(r3.slots[i].alice_bit));
        if (r3.slots[i].eve_answer != kTable3EveAnswers[i])
            mismatch(rep, at + " eve answer", yn(kTable3EveAnswers[i]), yn(r3.slots[i].eve_answer));
        if (r3.slots[i].bob_answer != kTable3BobAnswers[i])
            mismatch(rep, at + " bob answer", yn(kTable3BobAnswers[i]), yn(r3.slots[i].bob_answer));
        if (r3.slots[i].bob_bit != kTable3BobBits[i])
            mismatch(rep, at + " bob bit", std::to_string(kTable3BobBits[i]),
                     std::to_string(r3.slots[i].bob_bit));
    }
    if (r3.kept_slots != kept_ref)
        mismatch(rep, "table 3 kept slots", join(kept_ref), join(r3.kept_slots));
    const std::vector<int> err_ref(std::begin(kTable3ErrorSlots), std::end(kTable3ErrorSlots));
    if (r3.error_slots != err_ref)
        mismatch(rep, "table 3 error slots", join(err_ref), join(r3.error_slots));
    if (r3.errors != 3 || r3.kept != 8)
        mismatch(rep, "table 3 error rate", "3/8",
                 std::to_string(r3.errors) + "/" + std::to_string(r3.kept));
    os << "  kept slots: " << join(r3.kept_slots) << "\n";
    os << "  error slots: " << join(r3.error_slots) << "\n";
    os << "  error rate: " << r3.errors << "/" << r3.kept << "\n";

    rep.ok = rep.mismatches.empty();
    os << "\n" << (rep.ok ? "all tables reproduced exactly" : "MISMATCHES FOUND") << "\n";
    for (const auto& m : rep.mismatches) os << "  " << m << "\n";
    rep.text = os.str();
    return rep;
}

} // namespace qkd::mbp
