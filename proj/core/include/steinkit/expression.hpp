#pragma once

#include <memory>
#include <string>

namespace steinkit {

// Tiny arithmetic-expression AST in one variable `x`.
//
// Grammar (usual precedence, '^' is right-associative power):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?
//   unary   := '-' unary | primary
//   primary := number | 'x' | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: exp, log, abs, sqrt, erf, min, max, indicator.
// indicator(e) evaluates to 1 when e >= 0 and 0 otherwise, so window
// densities can be written e.g. indicator(x-a)*indicator(b-x).

class ExpressionAst {
  public:
    // Throws ParseError (with character position) on malformed input.
    static ExpressionAst parse(const std::string& text);

    double eval(double x) const;
    const std::string& text() const { return text_; }

    ExpressionAst() = default;

    struct Node; // implementation detail, defined in the .cpp

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace steinkit
