#pragma once

// Hand-written programs shared by several test binaries.

#include <string>

#include "patchdistill/source_tree.hpp"

namespace pd::fixtures {

inline const char* kNode = R"(package inline;

class Node {
    string kind;
    int uses;
}
)";

inline const char* kConvention = R"(package inline;

class Convention {
    bool strict = true;

    bool isPropertyTest(Node value) {
        return strict && value.kind == "test";
    }

    bool isSingletonGetter(Node value) {
        return value.kind == "getInstance";
    }
}
)";

inline const char* kCompiler = R"(package inline;

class Compiler {
    Convention convention = new Convention();

    Convention getConvention() {
        return convention;
    }
}
)";

// Buggy version: singleton getters are inlined.
inline const char* kInlinerBuggy = R"(package inline;

class Inliner {
    Compiler compiler = new Compiler();

    bool canInline(Node value) {
        if (value == null) {
            return false;
        }
        if (value.uses > 1) {
            return false;
        }
        if (compiler.getConvention().isPropertyTest(value)) {
            return false;
        }
        return true;
    }
}
)";

// Same method after hoisting the convention lookup into a local.
inline const char* kInlinerRefactored = R"(package inline;

class Inliner {
    Compiler compiler = new Compiler();

    bool canInline(Node value) {
        if (value == null) {
            return false;
        }
        if (value.uses > 1) {
            return false;
        }
        Convention convention = compiler.getConvention();
        if (convention.isPropertyTest(value)) {
            return false;
        }
        return true;
    }
}
)";

// Fixed version: extract-variable refactoring plus the guard.
inline const char* kInlinerFixed = R"(package inline;

class Inliner {
    Compiler compiler = new Compiler();

    bool canInline(Node value) {
        if (value == null) {
            return false;
        }
        if (value.uses > 1) {
            return false;
        }
        Convention convention = compiler.getConvention();
        if (convention.isPropertyTest(value)) {
            return false;
        }
        if (convention.isSingletonGetter(value)) {
            return false;
        }
        return true;
    }
}
)";

inline const char* kInlinerTestOld = R"(package inline;

class InlinerTest {
    Node node(string kind, int uses) {
        Node n = new Node();
        n.kind = kind;
        n.uses = uses;
        return n;
    }

    void test_helper_is_inlined() {
        assert new Inliner().canInline(node("helper", 1));
    }

    void test_null_is_not_inlined() {
        assert !new Inliner().canInline(null);
    }

    void test_shared_is_not_inlined() {
        assert !new Inliner().canInline(node("helper", 2));
    }

    void test_property_test_is_not_inlined() {
        assert !new Inliner().canInline(node("test", 1));
    }
}
)";

inline const char* kInlinerTestNew = R"(package inline;

class InlinerTest {
    Node node(string kind, int uses) {
        Node n = new Node();
        n.kind = kind;
        n.uses = uses;
        return n;
    }

    void test_helper_is_inlined() {
        assert new Inliner().canInline(node("helper", 1));
    }

    void test_null_is_not_inlined() {
        assert !new Inliner().canInline(null);
    }

    void test_shared_is_not_inlined() {
        assert !new Inliner().canInline(node("helper", 2));
    }

    void test_property_test_is_not_inlined() {
        assert !new Inliner().canInline(node("test", 1));
    }

    void test_singleton_getter_is_not_inlined() {
        assert !new Inliner().canInline(node("getInstance", 1));
    }
}
)";

// The concise patch against the refactoring-included version.
inline const char* kInlinerGroundTruth = R"(--- a/src/inline/Inliner.ml4j
+++ b/src/inline/Inliner.ml4j
@@ -14,6 +14,9 @@
         if (convention.isPropertyTest(value)) {
             return false;
         }
+        if (convention.isSingletonGetter(value)) {
+            return false;
+        }
         return true;
     }
 }
)";

inline SourceTree inliner_tree(const char* inliner, const char* tests) {
  SourceTree t;
  t.files["src/inline/Node.ml4j"] = kNode;
  t.files["src/inline/Convention.ml4j"] = kConvention;
  t.files["src/inline/Compiler.ml4j"] = kCompiler;
  t.files["src/inline/Inliner.ml4j"] = inliner;
  t.files["tests/inline/InlinerTest.ml4j"] = tests;
  return t;
}

inline SourceTree inliner_old() { return inliner_tree(kInlinerBuggy, kInlinerTestOld); }
inline SourceTree inliner_new() { return inliner_tree(kInlinerFixed, kInlinerTestNew); }

}  // namespace pd::fixtures
