#include "tg/corpus.hpp"

#include "tg/error.hpp"

namespace tg {

const char* set_tag_name(SetTag t) {
    switch (t) {
        case SetTag::C: return "C";
        case SetTag::B: return "B";
        case SetTag::F: return "F";
        case SetTag::A: return "A";
        case SetTag::E: return "E";
    }
    return "?";
}

SetTag parse_set_tag(std::string_view s) {
    if (s == "C") return SetTag::C;
    if (s == "B") return SetTag::B;
    if (s == "F") return SetTag::F;
    if (s == "A") return SetTag::A;
    if (s == "E") return SetTag::E;
    throw Error(ErrorKind::parse, "unknown set tag '" + std::string(s) + "'");
}

void check_record_tags(const TweetRecord& rec) {
    if (rec.has_tag(SetTag::B) && rec.has_tag(SetTag::F)) {
        throw Error(ErrorKind::validation,
                    "record '" + rec.guid + "' is tagged both B and F");
    }
    if (rec.has_tag(SetTag::F) && !rec.k) {
        throw Error(ErrorKind::validation,
                    "record '" + rec.guid + "' is tagged F but its prefilter flag is false");
    }
    if (rec.has_tag(SetTag::E) && !rec.has_tag(SetTag::A)) {
        throw Error(ErrorKind::validation,
                    "record '" + rec.guid + "' is tagged E but not A");
    }
}

}  // namespace tg
