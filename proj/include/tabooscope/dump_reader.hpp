#pragma once

// Streaming reader for MediaWiki pages-meta-history XML exports, built on
// expat. Revision text is never retained: it is digested on the fly when the
// export carries no <sha1>, and scanned for disambiguation markers.

#include <expat.h>

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace tabooscope {

enum class ContributorKind { account, anonymous, bot };

struct Contributor {
    ContributorKind kind = ContributorKind::anonymous;
    std::string name;        // account name or IP address; empty when suppressed
    bool suppressed = false;  // deleted contributor field, treated as anonymous

    friend bool operator==(const Contributor&, const Contributor&) = default;
};

struct DumpRevision {
    std::int64_t revision_id = 0;
    Instant timestamp = 0;
    Contributor contributor;
    std::string checksum;
};

struct DumpPage {
    std::int64_t page_id = 0;
    int ns = 0;
    std::string title;
    std::string redirect;  // from <redirect title="..."/>
    std::vector<std::string> markers;
    std::vector<DumpRevision> revisions;
};

// Decides, once the page header has been read, whether revisions of the page
// are worth keeping. Pages that are not kept still reach the page callback,
// with an empty revision list.
using PageFilter = std::function<bool(int ns, std::int64_t page_id, const std::string& title)>;
using PageCallback = std::function<void(DumpPage&&)>;

inline bool text_has_disambiguation_marker(std::string_view text) {
    static constexpr std::string_view needles[] = {"{{disambiguation", "{{disambig", "{{dab}}", "{{dab|",
                                                   "{{hndis",          "{{geodis",   "category:disambiguation"};
    std::string lower = to_lower(text);
    for (auto n : needles)
        if (lower.find(n) != std::string::npos) return true;
    return false;
}

class DumpReader {
  public:
    DumpReader(PageCallback on_page, PageFilter keep = nullptr)
        : on_page_(std::move(on_page)), keep_(std::move(keep)) {}

    void parse(std::istream& in) {
        std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                          &XML_ParserFree);
        if (!parser) throw std::runtime_error("cannot create XML parser");
        XML_SetUserData(parser.get(), this);
        XML_SetElementHandler(parser.get(), &DumpReader::on_start, &DumpReader::on_end);
        XML_SetCharacterDataHandler(parser.get(), &DumpReader::on_chars);

        std::vector<char> buf(1 << 16);
        while (true) {
            in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
            auto got = in.gcount();
            bool done = got < static_cast<std::streamsize>(buf.size());
            if (XML_Parse(parser.get(), buf.data(), static_cast<int>(got), done) == XML_STATUS_ERROR)
                throw ParseError(std::string("XML dump: ") + XML_ErrorString(XML_GetErrorCode(parser.get())) +
                                 " at line " + std::to_string(XML_GetCurrentLineNumber(parser.get())));
            if (!error_.empty()) throw ParseError("XML dump: " + error_);
            if (done) break;
        }
        if (in.bad()) throw IoError("read failure on XML dump");
    }

  private:
    enum class Field { none, title, ns, page_id, rev_id, timestamp, username, ip, sha1, text };

    static void on_start(void* ud, const XML_Char* name, const XML_Char** attrs) {
        static_cast<DumpReader*>(ud)->start(name, attrs);
    }
    static void on_end(void* ud, const XML_Char* name) { static_cast<DumpReader*>(ud)->end(name); }
    static void on_chars(void* ud, const XML_Char* s, int len) {
        static_cast<DumpReader*>(ud)->chars(std::string_view(s, static_cast<std::size_t>(len)));
    }

    void start(std::string_view name, const XML_Char** attrs) {
        buffer_.clear();
        field_ = Field::none;
        if (name == "page") {
            page_ = DumpPage{};
            in_page_ = true;
            keep_decided_ = false;
            keeping_ = false;
            last_text_marker_ = false;
        } else if (!in_page_) {
            return;
        } else if (name == "revision") {
            decide_keep();
            in_revision_ = true;
            rev_ = DumpRevision{};
            has_sha1_ = false;
            text_digest_ = keeping_ ? std::make_unique<Sha1>() : nullptr;
            text_marker_ = false;
        } else if (name == "contributor") {
            in_contributor_ = true;
            for (int i = 0; attrs[i]; i += 2)
                if (std::string_view(attrs[i]) == "deleted") rev_.contributor = {ContributorKind::anonymous, "", true};
        } else if (name == "redirect") {
            for (int i = 0; attrs[i]; i += 2)
                if (std::string_view(attrs[i]) == "title") page_.redirect = attrs[i + 1];
        } else if (name == "title" && !in_revision_) {
            field_ = Field::title;
        } else if (name == "ns" && !in_revision_) {
            field_ = Field::ns;
        } else if (name == "id") {
            if (in_contributor_) return;
            field_ = in_revision_ ? Field::rev_id : Field::page_id;
        } else if (in_revision_ && name == "timestamp") {
            field_ = Field::timestamp;
        } else if (in_contributor_ && name == "username") {
            field_ = Field::username;
        } else if (in_contributor_ && name == "ip") {
            field_ = Field::ip;
        } else if (in_revision_ && name == "sha1") {
            field_ = Field::sha1;
        } else if (in_revision_ && name == "text") {
            field_ = Field::text;
            scan_tail_.clear();
        }
    }

    void chars(std::string_view s) {
        switch (field_) {
            case Field::none: return;
            case Field::text:
                if (text_digest_) text_digest_->update(s);
                // Markers may straddle chunk boundaries; keep a short tail.
                scan_tail_ += s;
                if (text_has_disambiguation_marker(scan_tail_)) text_marker_ = true;
                if (scan_tail_.size() > 64) scan_tail_.erase(0, scan_tail_.size() - 64);
                return;
            default: buffer_ += s;
        }
    }

    void end(std::string_view name) {
        if (!in_page_) return;
        try {
            switch (field_) {
                case Field::title: page_.title = buffer_; break;
                case Field::ns: page_.ns = parse_int<int>(buffer_, "namespace"); break;
                case Field::page_id: page_.page_id = parse_int<std::int64_t>(buffer_, "page id"); break;
                case Field::rev_id: rev_.revision_id = parse_int<std::int64_t>(buffer_, "revision id"); break;
                case Field::timestamp: rev_.timestamp = parse_instant(buffer_); break;
                case Field::username: rev_.contributor = {ContributorKind::account, buffer_, false}; break;
                case Field::ip: rev_.contributor = {ContributorKind::anonymous, buffer_, false}; break;
                case Field::sha1:
                    if (!trim(buffer_).empty()) {
                        rev_.checksum = std::string(trim(buffer_));
                        has_sha1_ = true;
                    }
                    break;
                default: break;
            }
        } catch (const std::exception& e) {
            if (error_.empty()) error_ = e.what();
        }
        field_ = Field::none;
        buffer_.clear();

        if (name == "contributor") {
            in_contributor_ = false;
        } else if (name == "revision") {
            in_revision_ = false;
            last_text_marker_ = text_marker_;
            if (keeping_) {
                if (!has_sha1_ && text_digest_) rev_.checksum = text_digest_->hex();
                page_.revisions.push_back(std::move(rev_));
            }
            text_digest_.reset();
        } else if (name == "page") {
            decide_keep();
            if (last_text_marker_) page_.markers.push_back("disambiguation");
            in_page_ = false;
            on_page_(std::move(page_));
        }
    }

    void decide_keep() {
        if (keep_decided_) return;
        keep_decided_ = true;
        keeping_ = !keep_ || keep_(page_.ns, page_.page_id, page_.title);
    }

    PageCallback on_page_;
    PageFilter keep_;
    DumpPage page_;
    DumpRevision rev_;
    Field field_ = Field::none;
    std::string buffer_;
    std::string scan_tail_;
    std::string error_;
    std::unique_ptr<Sha1> text_digest_;
    bool in_page_ = false;
    bool in_revision_ = false;
    bool in_contributor_ = false;
    bool keep_decided_ = false;
    bool keeping_ = false;
    bool has_sha1_ = false;
    bool text_marker_ = false;
    bool last_text_marker_ = false;
};

}  // namespace tabooscope
