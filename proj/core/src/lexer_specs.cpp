#include <map>

#include "plsim/error.hpp"
#include "plsim/lexer.hpp"

namespace plsim {

namespace {

constexpr const char* kCFamilyOps =
    "operators = ... <<= >>= -> ++ -- << >> <= >= == != && || += -= *= /= %=\n"
    "operators = &= |= ^= ## + - * / % < > = ! ~ & | ^ ? : ; , . ( ) [ ] { } #\n";

struct BuiltinSource {
  const char* name;
  std::string text;
};

std::vector<BuiltinSource> builtin_sources() {
  const std::string c_ident =
      "identifier_start = a-zA-Z_\\x80-\\xff\n"
      "identifier_continue = 0-9a-zA-Z_\\x80-\\xff\n";
  const std::string c_comments =
      "line_comment = //\n"
      "block_comment = /* */\n";
  const std::string c_strings =
      "string = \" \" \\\\\n"
      "string = ' ' \\\\\n";
  const std::string cxx_extra = "operators = :: ->* .* <=>\n";

  return {
      {"assembly",
       "language = assembly\n"
       "case_sensitive = true\n"
       "line_comment = ; #\n"
       "block_comment = /* */\n"
       "string = \" \" \\\\\n"
       "string = ' ' \\\\\n"
       "identifier_start = a-zA-Z_.$@\n"
       "identifier_continue = 0-9a-zA-Z_.$@\n"
       "operators = << >> , : [ ] ( ) + - * / % & | ^ ~ < > = ! { }\n"},
      {"c", "language = c\ncase_sensitive = true\n" + c_comments + c_strings + c_ident + kCFamilyOps},
      {"cobol",
       "language = cobol\n"
       "case_sensitive = false\n"
       "line_comment = *>\n"
       "string = \" \"\n"
       "string = ' '\n"
       "identifier_start = a-zA-Z\n"
       "identifier_continue = 0-9a-zA-Z_\\-\n"
       "operators = ** <= >= <> . , ( ) = < > + - * / : &\n"},
      {"cpp", "language = cpp\ncase_sensitive = true\n" + c_comments + c_strings + c_ident +
                  kCFamilyOps + cxx_extra},
      {"cuda", "language = cuda\ncase_sensitive = true\n" + c_comments + c_strings + c_ident +
                   kCFamilyOps + cxx_extra + "operators = <<< >>>\n"},
      {"elisp",
       "language = elisp\n"
       "case_sensitive = true\n"
       "line_comment = ;\n"
       "string = \" \" \\\\\n"
       "identifier_start = a-zA-Z_\\-+*/<>=!?&%$^~:\\x80-\\xff\n"
       "identifier_continue = 0-9a-zA-Z_\\-+*/<>=!?&%$^~:.\\x80-\\xff\n"
       "operators = ,@ #' ( ) [ ] ' ` , .\n"},
      {"fortran",
       "language = fortran\n"
       "case_sensitive = false\n"
       "line_comment = !\n"
       "string = \" \"\n"
       "string = ' '\n"
       "identifier_start = a-zA-Z\n"
       "identifier_continue = 0-9a-zA-Z_\n"
       "operators = ** // == /= <= >= => :: ( ) , = + - * / < > : ; % & .\n"},
      {"go",
       "language = go\n"
       "case_sensitive = true\n" +
           c_comments +
           "string = \" \" \\\\\n"
           "string = ' ' \\\\\n"
           "string = ` `\n" +
           c_ident +
           "operators = ... &^= <<= >>= := <- &^ ++ -- << >> <= >= == != && || += -= *= /=\n"
           "operators = %= &= |= ^= + - * / % < > = ! & | ^ : ; , . ( ) [ ] { } ~\n"},
      {"html",
       "language = html\n"
       "case_sensitive = false\n"
       "block_comment = <!-- -->\n"
       "string = \" \"\n"
       "identifier_start = a-zA-Z_\\x80-\\xff\n"
       "identifier_continue = 0-9a-zA-Z_\\-\\x80-\\xff\n"
       "operators = </ /> <! < > = & ; / . , : ! ? ( ) # - { } [ ] +\n"},
      {"java",
       "language = java\n"
       "case_sensitive = true\n" +
           c_comments +
           "string = \"\"\" \"\"\" \\\\\n" + c_strings +
           "identifier_start = a-zA-Z_$\\x80-\\xff\n"
           "identifier_continue = 0-9a-zA-Z_$\\x80-\\xff\n" +
           kCFamilyOps + "operators = >>>= >>> :: @\n"},
      {"javascript",
       "language = javascript\n"
       "case_sensitive = true\n" +
           c_comments + c_strings +
           "string = ` ` \\\\\n"
           "identifier_start = a-zA-Z_$\\x80-\\xff\n"
           "identifier_continue = 0-9a-zA-Z_$\\x80-\\xff\n" +
           kCFamilyOps + "operators = >>>= === !== **= >>> ** => ?. ?? ?\?= &&= ||=\n"},
      {"julia",
       "language = julia\n"
       "case_sensitive = true\n"
       "line_comment = #\n"
       "block_comment = #= =# nested\n"
       "string = \"\"\" \"\"\" \\\\\n"
       "string = \" \" \\\\\n"
       "identifier_start = a-zA-Z_\\x80-\\xff\n"
       "identifier_continue = 0-9a-zA-Z_!\\x80-\\xff\n"
       "operators = ... .+ .- .* ./ .^ -> => == != <= >= && || :: += -= *= /= |> <: >:\n"
       "operators = + - * / \\\\ ^ % < > = ! & | ~ ? : ; , . ( ) [ ] { } $ @ '\n"},
      {"kotlin",
       "language = kotlin\n"
       "case_sensitive = true\n"
       "line_comment = //\n"
       "block_comment = /* */ nested\n"
       "string = \"\"\" \"\"\"\n"
       "string = \" \" \\\\\n"
       "string = ' ' \\\\\n" +
           c_ident +
           "operators = === !== ?. ?: !! :: .. -> ++ -- <= >= == != && || += -= *= /= %=\n"
           "operators = + - * / % < > = ! ? : ; , . ( ) [ ] { } @ &\n"},
      {"lisp",
       "language = lisp\n"
       "case_sensitive = false\n"
       "line_comment = ;\n"
       "block_comment = #| |# nested\n"
       "string = \" \" \\\\\n"
       "identifier_start = a-zA-Z_\\-+*/<>=!?&%$^~:\\x80-\\xff\n"
       "identifier_continue = 0-9a-zA-Z_\\-+*/<>=!?&%$^~:.\\x80-\\xff\n"
       "operators = ,@ #' #( ( ) ' ` , .\n"},
      {"mathematica",
       "language = mathematica\n"
       "case_sensitive = true\n"
       "block_comment = (* *) nested\n"
       "string = \" \" \\\\\n"
       "identifier_start = a-zA-Z$\\x80-\\xff\n"
       "identifier_continue = 0-9a-zA-Z$\\x80-\\xff\n"
       "operators = @@@ //. === =!= := :> -> /. @@ /@ // == != <= >= && || ++ -- += -=\n"
       "operators = ## ;; <> + - * / ^ < > = ! & | ? : ; , . ( ) [ ] { } @ # _ ~ '\n"},
      {"python",
       "language = python\n"
       "case_sensitive = true\n"
       "line_comment = #\n"
       "string = \"\"\" \"\"\" \\\\\n"
       "string = ''' ''' \\\\\n" +
           c_strings + c_ident +
           "operators = **= //= >>= <<= ... ** // -> := << >> <= >= == != += -= *= /= %= &=\n"
           "operators = |= ^= @= + - * / % < > = ! ~ & | ^ : ; , . ( ) [ ] { } @\n"},
      {"r",
       "language = r\n"
       "case_sensitive = true\n"
       "line_comment = #\n" +
           c_strings +
           "string = ` `\n"
           "identifier_start = a-zA-Z.\\x80-\\xff\n"
           "identifier_continue = 0-9a-zA-Z._\\x80-\\xff\n"
           "operators = %in% %/% %>% %o% %*% ::: <<- ->> :: <- -> |> == != <= >= && || %%\n"
           "operators = + - * / ^ < > = ! & | ~ ? : ; , ( ) [ ] { } $ @ \\\\\n"},
      {"ruby",
       "language = ruby\n"
       "case_sensitive = true\n"
       "line_comment = #\n"
       "block_comment = =begin =end\n" +
           c_strings +
           "identifier_start = a-zA-Z_@$\\x80-\\xff\n"
           "identifier_continue = 0-9a-zA-Z_?!\\x80-\\xff\n"
           "operators = **= <=> === ... <<= >>= &&= ||= ** =~ !~ .. :: -> => << >> <= >= ==\n"
           "operators = != && || += -= *= /= %= |= &= + - * / % < > = ! ~ & | ^ ? : ; , . ( )\n"
           "operators = [ ] { }\n"},
      {"scala",
       "language = scala\n"
       "case_sensitive = true\n"
       "line_comment = //\n"
       "block_comment = /* */ nested\n"
       "string = \"\"\" \"\"\"\n" +
           c_strings + c_ident +
           "operators = => <- <: >: :: :+ +: ++ -- <= >= == != && || += -= *= /= %=\n"
           "operators = + - * / % < > = ! ~ & | ^ ? : ; , . ( ) [ ] { } @ # _\n"},
      {"webassembly",
       "language = webassembly\n"
       "case_sensitive = true\n"
       "line_comment = ;;\n"
       "block_comment = (; ;) nested\n"
       "string = \" \" \\\\\n"
       "identifier_start = a-zA-Z_$\n"
       "identifier_continue = 0-9a-zA-Z_.$\\-\n"
       "operators = ( ) =\n"},
  };
}

const std::map<std::string, LexerSpec, std::less<>>& registry() {
  static const auto specs = [] {
    std::map<std::string, LexerSpec, std::less<>> m;
    for (const auto& src : builtin_sources()) m.emplace(src.name, parse_lexer_spec(src.text));
    return m;
  }();
  return specs;
}

}  // namespace

const LexerSpec& builtin_lexer_spec(std::string_view language) {
  const auto& specs = registry();
  std::string key(language);
  if (key == "c++") key = "cpp";
  if (key == "emacs-lisp" || key == "emacs_lisp") key = "elisp";
  if (key == "js") key = "javascript";
  if (key == "wasm" || key == "wat") key = "webassembly";
  auto it = specs.find(key);
  if (it == specs.end()) throw LexError("no builtin lexer spec for language: " + std::string(language));
  return it->second;
}

std::vector<std::string> builtin_lexer_languages() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : registry()) names.push_back(name);
  return names;
}

}  // namespace plsim
