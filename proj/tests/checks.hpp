#pragma once

// Always-on test assertions; a failure prints the location and aborts the
// binary with a nonzero status for ctest.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace testutil {

inline int& failures() {
    static int n = 0;
    return n;
}

#define CHECK(cond)                                                                    \
    do {                                                                               \
        if (!(cond)) {                                                                 \
            std::fprintf(stderr, "[FAIL] %s:%d  %s\n", __FILE__, __LINE__, #cond);     \
            std::exit(1);                                                              \
        }                                                                              \
    } while (0)

#define CHECK_MSG(cond, ...)                                                           \
    do {                                                                               \
        if (!(cond)) {                                                                 \
            std::fprintf(stderr, "[FAIL] %s:%d  %s  (", __FILE__, __LINE__, #cond);    \
            std::fprintf(stderr, __VA_ARGS__);                                         \
            std::fprintf(stderr, ")\n");                                               \
            std::exit(1);                                                              \
        }                                                                              \
    } while (0)

#define CHECK_NEAR(a, b, tol)                                                          \
    do {                                                                               \
        const double a_ = (a), b_ = (b), tol_ = (tol);                                 \
        if (!(std::fabs(a_ - b_) <= tol_)) {                                           \
            std::fprintf(stderr, "[FAIL] %s:%d  |%s - %s| = %.3e > %.3e  (%.17g vs %.17g)\n", \
                         __FILE__, __LINE__, #a, #b, std::fabs(a_ - b_), tol_, a_, b_);\
            std::exit(1);                                                              \
        }                                                                              \
    } while (0)

#define CHECK_THROWS(expr, extype)                                                     \
    do {                                                                               \
        bool caught_ = false;                                                          \
        try {                                                                          \
            (void)(expr);                                                              \
        } catch (const extype&) {                                                      \
            caught_ = true;                                                            \
        } catch (...) {                                                                \
        }                                                                              \
        if (!caught_) {                                                                \
            std::fprintf(stderr, "[FAIL] %s:%d  expected %s from %s\n", __FILE__,      \
                         __LINE__, #extype, #expr);                                    \
            std::exit(1);                                                              \
        }                                                                              \
    } while (0)

inline void pass(const char* name) { std::printf("[ ok ] %s\n", name); }

} // namespace testutil
