#pragma once

#include "sepvar/expr.hpp"

namespace sepvar {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t offset_1based)
        : std::runtime_error(msg + " at offset " + std::to_string(offset_1based)),
          offset(offset_1based) {}
    std::size_t offset;  // 1-based byte offset into the input
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(std::string ident, std::size_t offset_1based)
        : ParseError("unknown identifier '" + ident + "'", offset_1based),
          identifier(std::move(ident)) {}
    std::string identifier;
};

/// Parse `text` against the expression grammar; identifiers must be chart
/// variable names or one of sin/cos/exp/log/sqrt.
Expr parse(const std::string& text, const Chart& chart);

}  // namespace sepvar
