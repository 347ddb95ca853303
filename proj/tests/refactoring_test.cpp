#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "fixtures.hpp"
#include "patchdistill/change_model.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/refactoring_engine.hpp"
#include "patchdistill/refactoring_miner.hpp"

using namespace pd;

namespace {

const char* kItem = R"(package shop;

class Item {
    int price = 3;
    int count = 2;

    int total(int discount) {
        int sum = price * count;
        int result = sum - discount;
        return result;
    }

    int twice(int k) {
        int sum = k + k;
        return sum;
    }
}
)";

const char* kCart = R"(package shop;

class Cart {
    Item item = new Item();

    int checkout(int coupon) {
        int a = item.total(coupon);
        int b = item.total(0);
        int c = item.price * item.count + 1;
        item.count = item.count + 1;
        return a + b + c;
    }
}
)";

const char* kCartTest = R"(package shop;

class CartTest {
    void test_checkout() {
        Cart c = new Cart();
        assert c.checkout(1) == 18;
    }
}
)";

SourceTree shop() {
  SourceTree t;
  t.files["src/shop/Item.ml4j"] = kItem;
  t.files["src/shop/Cart.ml4j"] = kCart;
  t.files["tests/shop/CartTest.ml4j"] = kCartTest;
  return normalize(t);
}

Refactoring make(RefactoringKind kind, const std::string& subject, const std::string& new_name) {
  Refactoring r;
  r.kind = kind;
  r.subject = subject;
  r.new_name = new_name;
  return r;
}

// Everything except the span, which depends on where detection looked.
bool same_intent(Refactoring a, Refactoring b) {
  a.span = b.span = {};
  return a == b;
}

std::size_t count_token(const SourceTree& t, const std::string& text) {
  std::size_t n = 0;
  for (const auto& [path, content] : t.files) {
    const auto toks = ml::token_texts(content);
    n += static_cast<std::size_t>(std::count(toks.begin(), toks.end(), text));
  }
  return n;
}

std::vector<Refactoring> one_of_each() {
  std::vector<Refactoring> out;
  out.push_back(make(RefactoringKind::RenamePackage, "shop", "store"));
  out.push_back(make(RefactoringKind::RenameClass, "shop.Item", "Product"));
  out.push_back(make(RefactoringKind::RenameMethod, "shop.Item.total", "amount"));
  out.push_back(make(RefactoringKind::RenameField, "shop.Item.price", "cost"));
  out.push_back(make(RefactoringKind::RenameParameter, "shop.Item.total.discount", "off"));
  out.push_back(make(RefactoringKind::RenameVariable, "shop.Item.total.result", "net"));
  Refactoring ev = make(RefactoringKind::ExtractVariable, "shop.Cart.checkout", "unit");
  ev.var_type = "int";
  ev.expression = "item.price * item.count";
  ev.occurrences = {0};
  out.push_back(ev);
  Refactoring em = make(RefactoringKind::ExtractMethod, "shop.Cart.checkout", "bump");
  em.statements = {"item.count = item.count + 1;\n"};
  em.insert_after = "checkout";
  out.push_back(em);
  return out;
}

}  // namespace

TEST_CASE("each refactoring kind is detected on its own") {
  const SourceTree base = shop();
  REQUIRE(ml::analyze(base).clean());
  for (const auto& r : one_of_each()) {
    CAPTURE(to_string(r.kind));
    const SourceTree changed = apply_refactoring(base, r);
    CHECK(ml::analyze(changed).clean());
    const auto found = detect(base, changed);
    REQUIRE(found.size() == 1);
    CHECK(same_intent(found[0], r));
    CHECK(normalize(reapply(base, {found, {}})) == normalize(changed));
  }
}

TEST_CASE("extracted statements round-trip through rendering") {
  // The expected statements in one_of_each() must match the renderer.
  const SourceTree base = shop();
  const auto em = one_of_each().back();
  const SourceTree changed = apply_refactoring(base, em);
  CHECK(changed.files.at("src/shop/Cart.ml4j").find("void bump()") != std::string::npos);
  CHECK(changed.files.at("src/shop/Cart.ml4j").find("        bump();") != std::string::npos);
}

TEST_CASE("rename method updates the declaration and every call site") {
  const SourceTree base = shop();
  const SourceTree changed = apply_refactoring(base, make(RefactoringKind::RenameMethod, "shop.Item.total", "amount"));
  CHECK(count_token(base, "total") == 3);
  CHECK(count_token(changed, "total") == 0);
  CHECK(count_token(changed, "amount") == 3);
}

TEST_CASE("renames that also touch tests keep the suite green") {
  const SourceTree base = shop();
  const SourceTree changed = apply_refactoring(base, make(RefactoringKind::RenameClass, "shop.Cart", "Basket"));
  CHECK(changed.files.count("src/shop/Basket.ml4j") == 1);
  CHECK(changed.files.at("tests/shop/CartTest.ml4j").find("new Basket()") != std::string::npos);
  CHECK(verify_behavior(base, changed, std::nullopt));
}

TEST_CASE("identical versions have no refactorings") {
  CHECK(detect(shop(), shop()).empty());
  CHECK(detect(fixtures::inliner_old(), fixtures::inliner_old()).empty());
}

TEST_CASE("a pure bug fix has no refactorings") {
  SourceTree fixed = shop();
  auto& cart = fixed.files["src/shop/Cart.ml4j"];
  cart.replace(cart.find("+ 1;"), 4, "+ 2;");
  CHECK(detect(shop(), fixed).empty());
}

TEST_CASE("the motivating example is one extract variable") {
  const auto found = detect(fixtures::inliner_old(), fixtures::inliner_new());
  REQUIRE(found.size() == 1);
  CHECK(found[0].kind == RefactoringKind::ExtractVariable);
  CHECK(found[0].subject == "inline.Inliner.canInline");
  CHECK(found[0].new_name == "convention");
  CHECK(found[0].var_type == "Convention");
  CHECK(found[0].expression == "compiler.getConvention()");
  CHECK(found[0].occurrences == std::vector<int>{0});
  CHECK(found[0].span.file == "src/inline/Inliner.ml4j");
}

TEST_CASE("reapplying the extract leaves only the guard in the diff") {
  const SourceTree old_v = fixtures::inliner_old();
  const SourceTree new_v = fixtures::inliner_new();
  const SourceTree refactored = reapply(old_v, {detect(old_v, new_v), {}});
  CHECK(refactored.files.at("src/inline/Inliner.ml4j") == normalize(fixtures::inliner_tree(fixtures::kInlinerRefactored, "")).files.at("src/inline/Inliner.ml4j"));
  const ChangeSeq seq = coarsen(diff(refactored, new_v), refactored);
  CHECK(seq.size() == 3);
  CHECK(to_unified_diff(refactored, pd::apply(refactored, seq)) == fixtures::kInlinerGroundTruth);
  // Without the refactoring the diff also carries the extraction.
  CHECK(coarsen(diff(normalize(old_v), new_v), normalize(old_v)).size() > 3);
}

TEST_CASE("methods with identical bodies renamed together stay unmatched") {
  SourceTree a;
  a.files["src/p/A.ml4j"] = R"(package p;
class A {
    int f(int x) { return x + 1; }
    int g(int x) { return x + 1; }
    int h(int x) { return x * 2; }
}
)";
  SourceTree b;
  b.files["src/p/A.ml4j"] = R"(package p;
class A {
    int f2(int x) { return x + 1; }
    int g2(int x) { return x + 1; }
    int h2(int x) { return x * 2; }
}
)";
  const auto found = detect(a, b);
  REQUIRE(found.size() == 1);
  CHECK(found[0].subject == "p.A.h");
  CHECK(found[0].new_name == "h2");
  const auto m = match_elements(a, b);
  std::size_t unmatched_methods = 0;
  for (const auto& e : m.removed) unmatched_methods += e.kind == ElementKind::Method;
  CHECK(unmatched_methods == 2);
}

TEST_CASE("renames that depend on each other are found together") {
  const SourceTree base = shop();
  std::vector<Refactoring> plan = {
      make(RefactoringKind::RenameClass, "shop.Item", "Product"),
      make(RefactoringKind::RenameField, "shop.Item.count", "qty"),
      make(RefactoringKind::RenameMethod, "shop.Item.total", "amount"),
      make(RefactoringKind::RenameVariable, "shop.Item.total.sum", "gross"),
  };
  const SourceTree changed = reapply(base, {plan, {}});
  auto found = detect(base, changed);
  std::sort(plan.begin(), plan.end(), refactoring_less);
  REQUIRE(found.size() == plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) CHECK(same_intent(found[i], plan[i]));
  CHECK(normalize(reapply(base, {found, {}})) == changed);
}

TEST_CASE("rename variable targets one declaration by ordinal") {
  SourceTree t;
  t.files["src/p/A.ml4j"] = R"(package p;
class A {
    int f(int x) {
        if (x > 0) {
            int y = x;
            x = y + 1;
        }
        if (x > 5) {
            int y = x * 2;
            x = y;
        }
        return x;
    }
}
)";
  t = normalize(t);
  Refactoring r = make(RefactoringKind::RenameVariable, "p.A.f.y", "z");
  r.ordinal = 1;
  const SourceTree changed = apply_refactoring(t, r);
  CHECK(count_token(changed, "y") == 2);
  CHECK(count_token(changed, "z") == 2);
  const auto found = detect(t, changed);
  REQUIRE(found.size() == 1);
  CHECK(same_intent(found[0], r));
}

TEST_CASE("empty plan leaves the tree unchanged") {
  CHECK(reapply(shop(), {}) == shop());
  CHECK(reapply(fixtures::inliner_old(), {}) == normalize(fixtures::inliner_old()));
}

TEST_CASE("conflicting plans are rejected as a whole") {
  const SourceTree base = shop();
  CHECK_THROWS_AS(apply_refactoring(base, make(RefactoringKind::RenameField, "shop.Item.price", "count")),
                  ReapplyConflict);
  CHECK_THROWS_AS(apply_refactoring(base, make(RefactoringKind::RenameClass, "shop.Item", "Cart")), ReapplyConflict);
  CHECK_THROWS_AS(apply_refactoring(base, make(RefactoringKind::RenameMethod, "shop.Item.nope", "x")),
                  ReapplyConflict);
  CHECK_THROWS_AS(apply_refactoring(base, make(RefactoringKind::RenameVariable, "shop.Item.total.sum", "result")),
                  ReapplyConflict);
  CHECK_THROWS_AS(apply_refactoring(base, make(RefactoringKind::RenameMethod, "shop.Item.total", "int")),
                  ReapplyConflict);

  // Extracting a statement that assigns an outer local is refused.
  Refactoring em = make(RefactoringKind::ExtractMethod, "shop.Item.total", "calc");
  em.statements = {"int result = sum - discount;\n"};
  CHECK_THROWS_AS(apply_refactoring(base, em), ReapplyConflict);

  // One bad step sinks the plan even after good ones.
  const std::vector<Refactoring> plan = {make(RefactoringKind::RenameClass, "shop.Item", "Product"),
                                         make(RefactoringKind::RenameMethod, "shop.Item.nope", "x")};
  CHECK_THROWS_AS(reapply(base, {plan, {}}), ReapplyConflict);
}

TEST_CASE("behaviour check tells a faithful refactoring from a harmful one") {
  SourceTree t;
  t.files["src/p/Counter.ml4j"] = R"(package p;
class Counter {
    int n = 0;
    int bump() {
        n = n + 1;
        return n;
    }
    int pair() {
        int a = bump();
        int b = bump();
        return a * 10 + b;
    }
}
)";
  t.files["tests/p/CounterTest.ml4j"] = R"(package p;
class CounterTest {
    void test_pair() {
        assert new Counter().pair() == 12;
    }
}
)";
  t = normalize(t);
  const SourceTree renamed = apply_refactoring(t, make(RefactoringKind::RenameMethod, "p.Counter.bump", "next"));
  CHECK(verify_behavior(t, renamed, std::nullopt));

  Refactoring ev = make(RefactoringKind::ExtractVariable, "p.Counter.pair", "v");
  ev.var_type = "int";
  ev.expression = "bump()";
  ev.occurrences = {0, 1};
  const SourceTree merged = apply_refactoring(t, ev);
  CHECK_FALSE(verify_behavior(t, merged, std::nullopt));
}

TEST_CASE("element matching reports renamed pairs and leftovers") {
  const SourceTree base = shop();
  SourceTree changed = apply_refactoring(base, make(RefactoringKind::RenameMethod, "shop.Item.twice", "doubled"));
  auto& item = changed.files["src/shop/Item.ml4j"];
  item.insert(item.rfind('}'), "\n    int spare() {\n        return 0;\n    }\n");
  const auto m = match_elements(base, changed);
  bool renamed = false;
  for (const auto& [o, n] : m.matched) {
    if (o.qualified_name == "shop.Item.twice") renamed = n.qualified_name == "shop.Item.doubled";
  }
  CHECK(renamed);
  REQUIRE(m.added.size() == 1);
  CHECK(m.added[0].qualified_name == "shop.Item.spare");
  CHECK(m.removed.empty());
}

TEST_CASE("refactorings serialize and parse back") {
  for (const auto& r : one_of_each()) {
    const auto j = to_json(r);
    CHECK(refactoring_from_json(nlohmann::json::parse(j.dump())) == r);
  }
  const auto text = dump_refactorings(detect(fixtures::inliner_old(), fixtures::inliner_new()));
  const auto arr = nlohmann::json::parse(text);
  REQUIRE(arr.size() == 1);
  CHECK(arr[0]["kind"] == "ExtractVariable");
  CHECK(arr[0]["subject"] == "inline.Inliner.canInline");
}

TEST_CASE("detection is deterministic") {
  const auto first = detect(fixtures::inliner_old(), fixtures::inliner_new());
  for (int i = 0; i < 20; ++i) CHECK(detect(fixtures::inliner_old(), fixtures::inliner_new()) == first);
}
