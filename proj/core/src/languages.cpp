#include "plsim/languages.hpp"

#include <array>

namespace plsim {

namespace {

constexpr std::array<LanguageProfile, 20> kLanguages{{
    {"assembly", "Assembly", "Unique syntax with a limited vocabulary", 100'000, 364'776'405},
    {"c", "C", "Widely used general-purpose programming language", 100'000, 326'871'237},
    {"cobol", "COBOL", "The language often present in legacy systems, with a very unique syntax", 2'978, 10'613'233},
    {"cpp", "C++", "Widely used general-purpose programming language, close to Java and C", 100'000, 368'090'173},
    {"cuda", "Cuda", "Domain specific application of C++", 58'355, 283'624'967},
    {"elisp", "Emacs Lisp", "Domain-specific application of Lisp", 54'768, 188'661'262},
    {"fortran", "Fortran", "Scientific computing language, with similar syntax to Julia and Ruby", 100'000, 607'478'891},
    {"go", "Go", "Domain-specific language with elements from C, C++, Python, and Ruby", 100'000, 232'054'204},
    {"html", "HTML", "Domain-specific language, with unique syntax", 100'000, 723'969'345},
    {"java", "Java", "Widely used general-purpose programming language", 100'000, 183'040'204},
    {"javascript", "JavaScript", "Widely used domain-specific programming language", 100'000, 325'109'387},
    {"julia", "Julia", "New emerging scientific computing language", 100'000, 242'836'338},
    {"kotlin", "Kotlin", "Mixture of Java and JS elements but less verbose", 100'000, 111'578'961},
    {"lisp", "Lisp", "General purpose list-based programming language", 100'000, 832'184'093},
    {"mathematica", "Mathematica", "Mathematical computing language with unique features", 26'895, 1'035'010'885},
    {"python", "Python", "General purpose programming language, with semantic whitespace", 100'000, 237'414'388},
    {"r", "R", "Scientific computing language", 39'194, 154'180'798},
    {"ruby", "Ruby", "General purpose language with syntax similar to Python and Julia", 100'000, 93'200'451},
    {"scala", "Scala", "JVM-based language with syntactic elements from JavaScript and C++", 100'000, 141'672'916},
    {"webassembly", "WebAssembly", "Domain-specific emerging list-based language", 5'359, 59'809'452},
}};

}  // namespace

std::span<const LanguageProfile> reference_languages() { return kLanguages; }

}  // namespace plsim
