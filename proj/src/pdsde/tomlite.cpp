#include "pdsde/tomlite.hpp"

#include <cctype>
#include <charconv>

#include "pdsde/error.hpp"

namespace pdsde::tomlite {

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : s_(text) {}

    nlohmann::json document() {
        nlohmann::json doc = nlohmann::json::object();
        nlohmann::json* table = nullptr;
        for (;;) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                const std::string name = bare_key();
                expect(']');
                if (doc.contains(name)) fail("duplicate table [" + name + "]");
                end_of_line();
                doc[name] = nlohmann::json::object();
                table = &doc[name];
                continue;
            }
            const std::string key = bare_key();
            if (!table) fail("key '" + key + "' outside of any table");
            if (table->contains(key)) fail("duplicate key '" + key + "'");
            skip_inline_ws();
            expect('=');
            nlohmann::json v = value();
            end_of_line();
            (*table)[key] = std::move(v);
        }
        return doc;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError("line " + std::to_string(line_), msg); }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    void skip_comment() {
        if (!eof() && peek() == '#') {
            while (!eof() && peek() != '\n') ++pos_;
        }
    }

    // Whitespace, comments and newlines (used inside arrays and between entries).
    void skip_all_ws() {
        for (;;) {
            skip_inline_ws();
            skip_comment();
            if (!eof() && peek() == '\n') {
                ++pos_;
                ++line_;
                continue;
            }
            return;
        }
    }

    void skip_blank_lines() { skip_all_ws(); }

    void end_of_line() {
        skip_inline_ws();
        skip_comment();
        if (eof()) return;
        if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
        ++pos_;
        ++line_;
    }

    void expect(char c) {
        skip_inline_ws();
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string bare_key() {
        skip_inline_ws();
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (pos_ == start) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    nlohmann::json value() {
        skip_inline_ws();
        if (eof()) fail("missing value");
        const char c = peek();
        if (c == '"') return string_value();
        if (c == '[') return array_value();
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number_value();
    }

    nlohmann::json string_value() {
        ++pos_;
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof()) fail("unterminated escape");
            const char e = s_[pos_++];
            switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: fail(std::string("unsupported escape \\") + e);
            }
        }
    }

    nlohmann::json array_value() {
        ++pos_;
        nlohmann::json arr = nlohmann::json::array();
        skip_all_ws();
        if (!eof() && peek() == ']') {
            ++pos_;
            return arr;
        }
        for (;;) {
            skip_all_ws();
            arr.push_back(value());
            skip_all_ws();
            if (eof()) fail("unterminated array");
            if (peek() == ',') {
                ++pos_;
                skip_all_ws();
                if (!eof() && peek() == ']') {
                    ++pos_;
                    return arr;
                }
                continue;
            }
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            fail(std::string("unexpected '") + peek() + "' in array");
        }
    }

    nlohmann::json number_value() {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                          peek() == '-' || peek() == '_')) {
            ++pos_;
        }
        std::string tok(s_.substr(start, pos_ - start));
        std::erase(tok, '_');
        if (tok.empty()) fail("expected a value");
        const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
        const char* last = tok.data() + tok.size();
        if (tok.find_first_of(".eE") == std::string::npos) {
            long long iv = 0;
            const auto [p, ec] = std::from_chars(first, last, iv);
            if (ec == std::errc() && p == last) return iv;
        }
        double dv = 0.0;
        const auto [p, ec] = std::from_chars(first, last, dv);
        if (ec != std::errc() || p != last) fail("invalid value '" + tok + "'");
        return dv;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

nlohmann::json parse(std::string_view text) { return Reader(text).document(); }

}  // namespace pdsde::tomlite
