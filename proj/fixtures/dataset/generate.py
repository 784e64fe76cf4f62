#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the bundled replay dataset: tasks.jsonl, responses/, script.json.

transcripts.json is recorded from script.json with `ssv eval --provider record`.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent.parent
RESP = HERE / "responses"

tasks = []
rules = []
files = {}


def task(tid, context, question, options, gold):
    tasks.append({"id": tid, "context": context, "question": question,
                  "options": [[chr(65 + i), o] for i, o in enumerate(options)], "gold": gold})


def rule(kind, contains, name, text, temperature=None):
    files[name] = text.strip("\n") + "\n"
    r = {"kind": kind, "contains": contains if isinstance(contains, list) else [contains],
         "response_file": "responses/" + name}
    if temperature is not None:
        r["temperature"] = temperature
    rules.append(r)


def inst_block(constraint, pos_desc, pos_code, neg_desc, neg_code):
    return (f"Constraint:\n{constraint}\nPositiveExampleDescription:\n{pos_desc}\nPositiveExampleCode:\n{pos_code}\n"
            f"NegativeExampleDescription:\n{neg_desc}\nNegativeExampleCode:\n{neg_code}\n")


def program(init, constraints, check_type, options):
    out = init.strip("\n") + "\n"
    for nl, code in constraints:
        out += f"\n#CONSTRAINT: {nl}\n{code.strip()}\n"
    out += f"\n#CHECK TYPE: {check_type}\n"
    out += "\n".join(f"#OPTION {chr(65 + i)}: {nl}\ncheck {code}\n" for i, (nl, code) in enumerate(options))
    return out


# ---- technicians --------------------------------------------------------------

TECH_CONTEXT = ("In a repair facility there are exactly six technicians: Stacy, Urma, Wim, Xena, Yolanda, and Zane. "
                "Each technician repairs machines of at least one of the following three types: radios, televisions, "
                "and VCRs, and no other types. The following conditions apply: Xena and exactly three other "
                "technicians repair radios. Yolanda repairs both televisions and VCRs. Stacy does not repair any type "
                "of machine that Yolanda repairs. Zane repairs more types of machines than Yolanda repairs. Wim does "
                "not repair any type of machine that Stacy repairs. Urma repairs exactly two types of machines.")
TECH_INIT = """#INIT: In a repair facility there are exactly six technicians: Stacy, Urma, Wim, Xena, Yolanda, and Zane. Each technician repairs machines of at least one of the following three types: radios, televisions, and VCRs, and no other types.
enum technicians_sort { Stacy, Urma, Wim, Xena, Yolanda, Zane }
enum machines_sort { radios, televisions, VCRs }
list technicians = [Stacy, Urma, Wim, Xena, Yolanda, Zane]
list machines = [radios, televisions, VCRs]
fn repairs(technicians_sort, machines_sort) -> Bool
assert ForAll([t: technicians_sort], Sum([repairs(t, m) for m in machines]) >= 1)
"""
C1_OK = "assert And(repairs(Xena, radios), Sum([And(t != Xena, repairs(t, radios)) for t in technicians]) == 3)"
C1_TOTAL = "assert And(repairs(Xena, radios), Sum([repairs(t, radios) for t in technicians]) == 3)"
C3_FORALL = "assert ForAll([m: machines_sort], Implies(repairs(Yolanda, m), Not(repairs(Stacy, m))))"
C3_EXISTS = "assert Exists([m: machines_sort], Implies(repairs(Yolanda, m), Not(repairs(Stacy, m))))"


def tech_constraints(c1=C1_OK, c3=C3_FORALL):
    return [
        ("Xena and exactly three other technicians repair radios.", c1),
        ("Yolanda repairs both televisions and VCRs.", "assert And(repairs(Yolanda, televisions), repairs(Yolanda, VCRs))"),
        ("Stacy does not repair any type of machine that Yolanda repairs.", c3),
        ("Zane repairs more types of machines than Yolanda repairs.",
         "assert Sum([repairs(Zane, m) for m in machines]) > Sum([repairs(Yolanda, m) for m in machines])"),
        ("Wim does not repair any type of machine that Stacy repairs.",
         "assert ForAll([m: machines_sort], Implies(repairs(Stacy, m), Not(repairs(Wim, m))))"),
        ("Urma repairs exactly two types of machines.", "assert Sum([repairs(Urma, m) for m in machines]) == 2"),
    ]


PAIRS = [("Stacy", "Urma"), ("Urma", "Yolanda"), ("Urma", "Xena"), ("Wim", "Xena"), ("Xena", "Yolanda")]
PAIR_OPTIONS = [(f"{a} and {b}", f"ForAll([m: machines_sort], repairs({a}, m) == repairs({b}, m))") for a, b in PAIRS]
MUST_OPTIONS = [("Urma repairs televisions.", "repairs(Urma, televisions)"),
                ("Wim repairs radios.", "repairs(Wim, radios)"),
                ("Urma repairs radios.", "repairs(Urma, radios)"),
                ("Xena repairs VCRs.", "repairs(Xena, VCRs)"),
                ("Zane does not repair VCRs.", "Not(repairs(Zane, VCRs))")]

TECH_INSTS = "".join([
    inst_block("Xena and exactly three other technicians repair radios.",
               "Only Stacy, Urma, Xena, and Zane repair radios and no one else.",
               "And(repairs(Stacy, radios) == True, repairs(Urma, radios) == True, repairs(Wim, radios) == False, "
               "repairs(Xena, radios) == True, repairs(Yolanda, radios) == False, repairs(Zane, radios) == True)",
               "Only Xena and Yolanda repair radios and no one else.",
               "And(repairs(Stacy, radios) == False, repairs(Urma, radios) == False, repairs(Wim, radios) == False, "
               "repairs(Xena, radios) == True, repairs(Yolanda, radios) == True, repairs(Zane, radios) == False)"),
    inst_block("Yolanda repairs both televisions and VCRs.",
               "Yolanda repairs televisions and VCRs.",
               "And(repairs(Yolanda, televisions) == True, repairs(Yolanda, VCRs) == True)",
               "Yolanda repairs televisions but not VCRs.",
               "And(repairs(Yolanda, televisions) == True, repairs(Yolanda, VCRs) == False)"),
    inst_block("Stacy does not repair any type of machine that Yolanda repairs.",
               "Stacy repairs radios and Yolanda repairs TVs.",
               "And(repairs(Stacy, radios) == True, repairs(Yolanda, televisions) == True)",
               "Stacy and Yolanda both repair TVs.",
               "And(repairs(Stacy, televisions) == True, repairs(Yolanda, televisions) == True)"),
    inst_block("Zane repairs more types of machines than Yolanda repairs.",
               "Zane repairs all three types while Yolanda repairs only radios.",
               "And(repairs(Zane, radios) == True, repairs(Zane, televisions) == True, repairs(Zane, VCRs) == True, "
               "repairs(Yolanda, radios) == True, repairs(Yolanda, televisions) == False, repairs(Yolanda, VCRs) == False)",
               "Zane and Yolanda both repair only VCRs.",
               "And(repairs(Zane, radios) == False, repairs(Zane, televisions) == False, repairs(Zane, VCRs) == True, "
               "repairs(Yolanda, radios) == False, repairs(Yolanda, televisions) == False, repairs(Yolanda, VCRs) == True)"),
    inst_block("Wim does not repair any type of machine that Stacy repairs.",
               "Stacy repairs radios and Wim repairs VCRs.",
               "And(repairs(Stacy, radios) == True, repairs(Wim, VCRs) == True)",
               "Stacy and Wim both repair radios.",
               "And(repairs(Stacy, radios) == True, repairs(Wim, radios) == True)"),
    inst_block("Urma repairs exactly two types of machines.",
               "Urma repairs radios and VCRs but not televisions.",
               "And(repairs(Urma, radios) == True, repairs(Urma, VCRs) == True, repairs(Urma, televisions) == False)",
               "Urma repairs all three types of machines.",
               "And(repairs(Urma, radios) == True, repairs(Urma, VCRs) == True, repairs(Urma, televisions) == True)"),
])

PAIRS_Q = "Which one of the following pairs of technicians could repair all and only the same types of machines as each other?"
MUST_Q = "Which one of the following must be true?"
task("tech-pairs", TECH_CONTEXT, PAIRS_Q, [o[0] for o in PAIR_OPTIONS], "C")
task("tech-must", TECH_CONTEXT, MUST_Q, [o[0] for o in MUST_OPTIONS], "C")

rule("DirectProgram", "pairs of technicians could repair all and only", "tech_pairs_direct.txt",
     program(TECH_INIT, tech_constraints(c3=C3_EXISTS), "sat", PAIR_OPTIONS))
rule("DirectProgram", "(C) Urma repairs radios.", "tech_must_direct.txt",
     program(TECH_INIT, tech_constraints(c1=C1_TOTAL), "valid", MUST_OPTIONS))
rule("Instantiations", "Urma repairs exactly two types of machines.\n>>> ConstraintExamples:",
     "tech_instantiations.txt", TECH_INSTS)
rule("SemanticRepair", "ConstraintDescription:\nStacy does not repair any type of machine that Yolanda repairs.",
     "tech_repair_c3.txt", f"""ProblemDiscussion:
The constraint says that Stacy repairs none of the machine types that Yolanda repairs. The constraint code only asserts that for some machine type, if Yolanda repairs it then Stacy does not, so it still allows Stacy and Yolanda to both repair televisions as long as some other type is not repaired by Yolanda. The negative example is correct and the initial code is fine, but the constraint code must assert the condition for all machine types using the ForAll quantifier.
RepairedInitialCode:
NONE
RepairedConstraintCode:
{C3_FORALL}
RepairedNegativeExampleCode:
NONE
""")
rule("SemanticRepair", "ConstraintDescription:\nXena and exactly three other technicians repair radios.",
     "tech_repair_c1.txt", f"""ProblemDiscussion:
The constraint requires Xena and three technicians other than Xena to repair radios, so four technicians in total repair radios. The constraint code counts Xena among the three, so only three technicians in total can repair radios and the positive example with four radio technicians is rejected. The initial code and the example are fine; the constraint code should count only the technicians other than Xena.
RepairedInitialCode:
NONE
RepairedConstraintCode:
{C1_OK}
RepairedPositiveExampleCode:
NONE
""")

# ---- meals --------------------------------------------------------------------

MEALS_CONTEXT = ("On Tuesday Vladimir and Wendy each eat exactly four separate meals: breakfast, lunch, dinner, and a snack. "
                 "The following is all that is known about what they eat during that day: At no meal does Vladimir eat "
                 "the same kind of food as Wendy. Neither of them eats the same kind of food more than once during the "
                 "day. For breakfast, each eats exactly one of the following: hot cakes, poached eggs, or omelet. For "
                 "lunch, each eats exactly one of the following: fish, hot cakes, macaroni, or omelet. For dinner, each "
                 "eats exactly one of the following: fish, hot cakes, macaroni, or omelet. For a snack, each eats exactly "
                 "one of the following: fish or omelet. Wendy eats an omelet for lunch.")
MEALS_PROGRAM = (ROOT / "fixtures/programs/meals.ssv").read_text()
MEALS_HEAD = MEALS_PROGRAM[:MEALS_PROGRAM.index("#CHECK TYPE")]
MEALS_OPTIONS = [("Vladimir eats hot cakes for a snack.", "eats(Vladimir, snack) == hot_cakes"),
                 ("Wendy eats fish for breakfast.", "eats(Wendy, breakfast) == fish"),
                 ("Vladimir eats an omelet for lunch.", "eats(Vladimir, lunch) == omelet"),
                 ("Wendy eats poached eggs for breakfast.", "eats(Wendy, breakfast) == poached_eggs"),
                 ("Wendy eats an omelet for a snack.", "eats(Wendy, snack) == omelet")]
meals_ok = MEALS_HEAD + "#CHECK TYPE: sat\n" + "\n".join(
    f"#OPTION {chr(65 + i)}: {nl}\ncheck {c}\n" for i, (nl, c) in enumerate(MEALS_OPTIONS))
meals_bad = meals_ok.replace("assert ForAll([m: meals_sort], eats(Vladimir, m) != eats(Wendy, m))",
                             "assert ForAll([m], eats(Vladimir, m) != eats(Wendy, m))")
assert meals_bad != meals_ok
task("meals-could", MEALS_CONTEXT, "Which one of the following could be true?", [o[0] for o in MEALS_OPTIONS], "D")
rule("DirectProgram", "(D) Wendy eats poached eggs for breakfast.", "meals_direct.txt", meals_bad)
rule("ErrorRefine", "Wendy eats an omelet for lunch.", "meals_refine.txt",
     ">>> ProblemDiscussion:\nThe quantifier in the first constraint binds m without giving its sort, so the "
     "program cannot be checked. Declaring the binder as m: meals_sort fixes the error.\n>>> CorrectedProgram:\n" + meals_ok)
rule("Instantiations", "Wendy eats an omelet for lunch.\n>>> ConstraintExamples:", "meals_instantiations.txt", "".join([
    inst_block("At no meal does Vladimir eat the same kind of food as Wendy.",
               "At breakfast Vladimir eats hot cakes and Wendy eats an omelet.",
               "And(eats(Vladimir, breakfast) == hot_cakes, eats(Wendy, breakfast) == omelet)",
               "Both eat an omelet for breakfast.",
               "And(eats(Vladimir, breakfast) == omelet, eats(Wendy, breakfast) == omelet)"),
    inst_block("Neither of them eats the same kind of food more than once during the day.",
               "Vladimir eats hot cakes for breakfast and fish for lunch.",
               "And(eats(Vladimir, breakfast) == hot_cakes, eats(Vladimir, lunch) == fish)",
               "Wendy eats fish for both lunch and dinner.",
               "And(eats(Wendy, lunch) == fish, eats(Wendy, dinner) == fish)"),
    inst_block("For breakfast, each eats exactly one of the following: hot cakes, poached eggs, or omelet.",
               "Vladimir eats poached eggs for breakfast.", "eats(Vladimir, breakfast) == poached_eggs",
               "Wendy eats fish for breakfast.", "eats(Wendy, breakfast) == fish"),
    inst_block("For lunch, each eats exactly one of the following: fish, hot cakes, macaroni, or omelet.",
               "Vladimir eats macaroni for lunch.", "eats(Vladimir, lunch) == macaroni",
               "Wendy eats poached eggs for lunch.", "eats(Wendy, lunch) == poached_eggs"),
    inst_block("For dinner, each eats exactly one of the following: fish, hot cakes, macaroni, or omelet.",
               "Wendy eats fish for dinner.", "eats(Wendy, dinner) == fish",
               "Vladimir eats poached eggs for dinner.", "eats(Vladimir, dinner) == poached_eggs"),
    inst_block("For a snack, each eats exactly one of the following: fish or omelet.",
               "Vladimir eats an omelet for a snack.", "eats(Vladimir, snack) == omelet",
               "Wendy eats macaroni for a snack.", "eats(Wendy, snack) == macaroni"),
    inst_block("Wendy eats an omelet for lunch.",
               "Wendy eats an omelet for lunch.", "eats(Wendy, lunch) == omelet",
               "Wendy eats fish for lunch.", "eats(Wendy, lunch) == fish"),
]))

# ---- books (integer positions; verifiable only at the second temperature) -------

BOOKS_CONTEXT = ("On a shelf there are five books: a red book, a blue book, a green book, a white book, and a black book. "
                 "Each book has its own position, numbered 1 to 5 from the left. The green book is to the left of the "
                 "white book. The red book is the second from the left. The blue book is the rightmost. The black book "
                 "is to the right of the white book.")
BOOKS_INIT = """#INIT: On a shelf there are five books: a red book, a blue book, a green book, a white book, and a black book. Each book has its own position, numbered 1 to 5 from the left.
enum books_sort { red_book, blue_book, green_book, white_book, black_book }
list books = [red_book, blue_book, green_book, white_book, black_book]
fn pos(books_sort) -> Int
assert ForAll([b: books_sort], And(pos(b) >= 1, pos(b) <= 5))
assert Distinct(pos(red_book), pos(blue_book), pos(green_book), pos(white_book), pos(black_book))
"""
BOOKS_OPTIONS = [("The green book is the leftmost.", "pos(green_book) == 1"),
                 ("The white book is the second from the left.", "pos(white_book) == 2"),
                 ("The black book is the third from the left.", "pos(black_book) == 3"),
                 ("The red book is the rightmost.", "pos(red_book) == 5"),
                 ("The white book is the leftmost.", "pos(white_book) == 1")]


def books_constraints(green):
    return [("The green book is to the left of the white book.", f"assert {green}"),
            ("The red book is the second from the left.", "assert pos(red_book) == 2"),
            ("The blue book is the rightmost.", "assert pos(blue_book) == 5"),
            ("The black book is to the right of the white book.", "assert pos(black_book) > pos(white_book)")]


task("books-order", BOOKS_CONTEXT, "Which one of the following is true?", [o[0] for o in BOOKS_OPTIONS], "A")
rule("DirectProgram", "(E) The white book is the leftmost.", "books_direct_t0.txt",
     program(BOOKS_INIT, books_constraints("pos(green_book) > pos(white_book)"), "valid", BOOKS_OPTIONS), temperature=0)
rule("DirectProgram", "(E) The white book is the leftmost.", "books_direct.txt",
     program(BOOKS_INIT, books_constraints("pos(green_book) < pos(white_book)"), "valid", BOOKS_OPTIONS))
rule("Instantiations", "The black book is to the right of the white book.\n>>> ConstraintExamples:",
     "books_instantiations.txt", "".join([
         inst_block("The green book is to the left of the white book.",
                    "The green book is first and the white book is third.",
                    "And(pos(green_book) == 1, pos(white_book) == 3)",
                    "The white book is first and the green book is fourth.",
                    "And(pos(white_book) == 1, pos(green_book) == 4)"),
         inst_block("The red book is the second from the left.", "The red book is in position 2.",
                    "pos(red_book) == 2", "The red book is in position 3.", "pos(red_book) == 3"),
         inst_block("The blue book is the rightmost.", "The blue book is in position 5.", "pos(blue_book) == 5",
                    "The blue book is in position 1.", "pos(blue_book) == 1"),
         inst_block("The black book is to the right of the white book.",
                    "The white book is third and the black book is fourth.",
                    "And(pos(white_book) == 3, pos(black_book) == 4)",
                    "The black book is first and the white book is second.",
                    "And(pos(black_book) == 1, pos(white_book) == 2)"),
     ]))
rule("SemanticRepair", "ConstraintDescription:\nThe green book is to the left of the white book.", "books_repair.txt",
     """ProblemDiscussion:
The example places the green book first and the white book third, which matches the description. I could not find a problem in the initial code or in the constraint code.
RepairedInitialCode:
NONE
RepairedConstraintCode:
NONE
RepairedPositiveExampleCode:
NONE
""")

# ---- fallback only ------------------------------------------------------------

BEAR_CONTEXT = ("The bear is big. The bear is not red. If something is big then it is kind. "
                "If something is kind and not red then it is calm.")
task("bear-fallback", BEAR_CONTEXT, "Is the following statement true, false, or unknown? The bear is not kind.",
     ["True", "False", "Unknown"], "B")
rule("DirectProgram", "The bear is not red.", "bear_direct.txt", "I am not able to write a program for this problem.")
rule("ErrorRefine", "I am not able to write a program", "bear_refine.txt", "Sorry, I cannot correct this.")
rule("Decompose", "The bear is not red.", "bear_decompose.txt", "The problem talks about a bear.")
rule("CotFallback", "The bear is not red.", "bear_cot.txt",
     "The bear is big, and everything big is kind, so the bear is kind. The statement says the bear is not kind, "
     "which contradicts this.\nAnswer: (B)")

# ---- compositional ------------------------------------------------------------

LORPUS_CONTEXT = "Every lorpus is a gorpus. Each gorpus is fast. Every fast creature is loud. Sally is a lorpus."
LORPUS_CONSTRAINTS = ["Every lorpus is a gorpus.", "Each gorpus is fast.", "Every fast creature is loud.",
                      "Sally is a lorpus."]
task("lorpus-compose", LORPUS_CONTEXT, "Is the following statement true or false? Sally is loud.", ["True", "False"], "A")
rule("DirectProgram", "Every fast creature is loud. Sally is a lorpus.", "lorpus_direct.txt",
     "#INIT\nsort creature_sort\nconst Sally: creature_sort\n#CONSTRAINT: Every lorpus is a gorpus.\n"
     "assert ForAll([x: creature_sort], Implies(is_lorpus(x), is_gorpus(x)))\n")
rule("ErrorRefine", "Every lorpus is a gorpus.", "lorpus_refine.txt",
     ">>> ProblemDiscussion:\nThe functions are used before they are declared.\n")
rule("Decompose", "Every fast creature is loud. Sally is a lorpus.", "lorpus_decompose.txt",
     "InitialContext:\nNone\nConstraints:\n" + "\n###\n".join(LORPUS_CONSTRAINTS))
rule("IncrementalConstraint", "NewConstraint:\nEvery lorpus is a gorpus. Each gorpus is fast.", "lorpus_init.txt",
     "sort creature_sort\nconst Sally: creature_sort\nfn is_lorpus(creature_sort) -> Bool\n"
     "fn is_gorpus(creature_sort) -> Bool\nfn is_fast(creature_sort) -> Bool\nfn is_loud(creature_sort) -> Bool")
for i, (nl, code) in enumerate(zip(LORPUS_CONSTRAINTS, [
        "assert ForAll([x: creature_sort], Implies(is_lorpus(x), is_gorpus(x)))",
        "assert ForAll([x: creature_sort], Implies(is_gorpus(x), is_fast(x)))",
        "assert ForAll([x: creature_sort], Implies(is_fast(x), is_loud(x)))",
        "assert is_lorpus(Sally)"])):
    rule("IncrementalConstraint", f"NewConstraint:\n{nl}\nNewConstraintCode:", f"lorpus_c{i + 1}.txt", code)
rule("OptionsCode", "Is the following statement true or false? Sally is loud.", "lorpus_options.txt",
     """# CHECK TYPE: the statement is either entailed or refuted, so check validity using is_valid()

# OPTION A:
# CHECK PROPERTY: Sally is loud. ANSWER: True
check is_loud(Sally)

# OPTION B:
# CHECK PROPERTY: Sally is loud. ANSWER: False
check Not(is_loud(Sally))
""")
rule("Instantiations", "Sally is a lorpus.\n>>> ConstraintExamples:", "lorpus_instantiations.txt", "".join([
    inst_block("Every lorpus is a gorpus.", "Sally is a lorpus and also a gorpus.",
               "And(is_lorpus(Sally) == True, is_gorpus(Sally) == True)",
               "Sally is a lorpus but not a gorpus.", "And(is_lorpus(Sally) == True, is_gorpus(Sally) == False)"),
    inst_block("Each gorpus is fast.", "Sally is a gorpus and is fast.",
               "And(is_gorpus(Sally) == True, is_fast(Sally) == True)",
               "Sally is a gorpus but is not fast.", "And(is_gorpus(Sally) == True, is_fast(Sally) == False)"),
    inst_block("Every fast creature is loud.", "Sally is fast and loud.",
               "And(is_fast(Sally) == True, is_loud(Sally) == True)",
               "Sally is fast but not loud.", "And(is_fast(Sally) == True, is_loud(Sally) == False)"),
    inst_block("Sally is a lorpus.", "Sally is a lorpus.", "is_lorpus(Sally) == True",
               "Sally is not a lorpus.", "is_lorpus(Sally) == False"),
]))

# ---- wrong and unverified -----------------------------------------------------

TEAMS_CONTEXT = ("Four players, Fay, Gus, Hal, and Ida, are split into a red team and a blue team. Fay and Gus are on "
                 "different teams. Hal is on the red team. Ida is on the same team as Gus. Each team has exactly two members.")
TEAMS_INIT = """#INIT: Four players, Fay, Gus, Hal, and Ida, are split into a red team and a blue team.
enum players_sort { Fay, Gus, Hal, Ida }
enum teams_sort { red_team, blue_team }
list players = [Fay, Gus, Hal, Ida]
fn team(players_sort) -> teams_sort
"""
TEAMS_BAD = "assert team(Ida) != team(Gus)"
TEAMS_OPTIONS = [("Fay is on the red team.", "team(Fay) == red_team"),
                 ("Gus is on the red team.", "team(Gus) == red_team"),
                 ("Ida is on the red team.", "team(Ida) == red_team"),
                 ("Hal is on the blue team.", "team(Hal) == blue_team")]
task("teams-wrong", TEAMS_CONTEXT, "Which one of the following must be true?", [o[0] for o in TEAMS_OPTIONS], "A")
rule("DirectProgram", "(D) Hal is on the blue team.", "teams_direct.txt", program(TEAMS_INIT, [
    ("Fay and Gus are on different teams.", "assert team(Fay) != team(Gus)"),
    ("Hal is on the red team.", "assert team(Hal) == red_team"),
    ("Ida is on the same team as Gus.", TEAMS_BAD),
    ("Each team has exactly two members.", "assert Sum([team(p) == red_team for p in players]) == 2"),
], "valid", TEAMS_OPTIONS))
rule("Instantiations", "Each team has exactly two members.\n>>> ConstraintExamples:", "teams_instantiations.txt", "".join([
    inst_block("Fay and Gus are on different teams.", "Fay is on the red team and Gus on the blue team.",
               "And(team(Fay) == red_team, team(Gus) == blue_team)",
               "Fay and Gus are both on the red team.", "And(team(Fay) == red_team, team(Gus) == red_team)"),
    inst_block("Hal is on the red team.", "Hal plays for the red team.", "team(Hal) == red_team",
               "Hal plays for the blue team.", "team(Hal) == blue_team"),
    inst_block("Ida is on the same team as Gus.", "Gus and Ida are both on the blue team.",
               "And(team(Gus) == blue_team, team(Ida) == blue_team)",
               "Gus is on the red team and Ida on the blue team.", "And(team(Gus) == red_team, team(Ida) == blue_team)"),
    inst_block("Each team has exactly two members.", "Fay and Hal are red, Gus and Ida are blue.",
               "And(team(Fay) == red_team, team(Hal) == red_team, team(Gus) == blue_team, team(Ida) == blue_team)",
               "Everyone is on the red team.",
               "And(team(Fay) == red_team, team(Gus) == red_team, team(Hal) == red_team, team(Ida) == red_team)"),
]))
rule("SemanticRepair", "ConstraintDescription:\nIda is on the same team as Gus.", "teams_repair.txt", f"""ProblemDiscussion:
The constraint code asserts that Ida and Gus are on different teams, which matches my reading of the constraint. The example is wrong to put them on the same team.
RepairedInitialCode:
NONE
RepairedConstraintCode:
{TEAMS_BAD}
RepairedPositiveExampleCode:
NONE
""")

# ---- degenerate constraint caught by well-formedness -----------------------------

RACE_CONTEXT = ("Four runners, Jo, Kim, Lee, and Max, finish a race in places 1 to 4 with no ties. Jo finishes before "
                "Kim. Lee finishes immediately after Kim. Max finishes last.")
RACE_INIT = """#INIT: Four runners, Jo, Kim, Lee, and Max, finish a race in places 1 to 4 with no ties.
enum runners_sort { Jo, Kim, Lee, Max }
fn place(runners_sort) -> Int
assert ForAll([r: runners_sort], And(place(r) >= 1, place(r) <= 4))
assert Distinct(place(Jo), place(Kim), place(Lee), place(Max))
"""
RACE_TAUT = "assert Or(place(Jo) < place(Kim), place(Jo) >= place(Kim))"
RACE_OPTIONS = [("Jo", "place(Jo) == 2"), ("Kim", "place(Kim) == 2"), ("Lee", "place(Lee) == 2"), ("Max", "place(Max) == 2")]
task("race-tautology", RACE_CONTEXT, "Which runner finishes second?", [o[0] for o in RACE_OPTIONS], "B")
rule("DirectProgram", "Which runner finishes second?", "race_direct.txt", program(RACE_INIT, [
    ("Jo finishes before Kim.", RACE_TAUT),
    ("Lee finishes immediately after Kim.", "assert place(Lee) == place(Kim) + 1"),
    ("Max finishes last.", "assert place(Max) == 4"),
], "sat", RACE_OPTIONS))
rule("Instantiations", "Max finishes last.\n>>> ConstraintExamples:", "race_instantiations.txt", "".join([
    inst_block("Jo finishes before Kim.", "Jo is first and Kim is second.", "And(place(Jo) == 1, place(Kim) == 2)",
               "NONE", "pass"),
    inst_block("Lee finishes immediately after Kim.", "Kim is second and Lee is third.",
               "And(place(Kim) == 2, place(Lee) == 3)",
               "Kim is first and Lee is third.", "And(place(Kim) == 1, place(Lee) == 3)"),
    inst_block("Max finishes last.", "Max is fourth.", "place(Max) == 4", "Max is first.", "place(Max) == 1"),
]))
rule("SemanticRepair", "ConstraintDescription:\nJo finishes before Kim.", "race_repair.txt", """ProblemDiscussion:
The constraint code is true whatever the places of Jo and Kim are, so it does not express that Jo finishes before Kim. The constraint code should compare the two places directly.
RepairedInitialCode:
NONE
RepairedConstraintCode:
assert place(Jo) < place(Kim)
RepairedPositiveExampleCode:
NONE
""")

# ---- directly verified ----------------------------------------------------------

ZIMPUS_CONTEXT = "Each zimpus is cold. Every cold creature is not shiny. Tom is a zimpus."
task("zimpus-direct", ZIMPUS_CONTEXT, "Is the following statement true or false? Tom is shiny.", ["True", "False"], "B")
rule("DirectProgram", "Every cold creature is not shiny.", "zimpus_direct.txt", program(
    "#INIT\nsort creature_sort\nconst Tom: creature_sort\nfn is_zimpus(creature_sort) -> Bool\n"
    "fn is_cold(creature_sort) -> Bool\nfn is_shiny(creature_sort) -> Bool\n",
    [("Each zimpus is cold.", "assert ForAll([x: creature_sort], Implies(is_zimpus(x), is_cold(x)))"),
     ("Every cold creature is not shiny.", "assert ForAll([x: creature_sort], Implies(is_cold(x), Not(is_shiny(x))))"),
     ("Tom is a zimpus.", "assert is_zimpus(Tom)")],
    "valid", [("True", "is_shiny(Tom)"), ("False", "Not(is_shiny(Tom))")]))
rule("Instantiations", "Tom is a zimpus.\n>>> ConstraintExamples:", "zimpus_instantiations.txt", "".join([
    inst_block("Each zimpus is cold.", "Tom is a zimpus and is cold.", "And(is_zimpus(Tom) == True, is_cold(Tom) == True)",
               "Tom is a zimpus but is not cold.", "And(is_zimpus(Tom) == True, is_cold(Tom) == False)"),
    inst_block("Every cold creature is not shiny.", "Tom is cold and not shiny.",
               "And(is_cold(Tom) == True, is_shiny(Tom) == False)",
               "Tom is cold and shiny.", "And(is_cold(Tom) == True, is_shiny(Tom) == True)"),
    inst_block("Tom is a zimpus.", "Tom is a zimpus.", "is_zimpus(Tom) == True",
               "Tom is not a zimpus.", "is_zimpus(Tom) == False"),
]))

# ---- correct but unverified: an example refers to an undeclared lamp -------------

LAMPS_CONTEXT = "There are three lamps: a red lamp, a green lamp, and a blue lamp. Exactly one lamp is on. The red lamp is off. The green lamp is off."
task("lamps-illformed", LAMPS_CONTEXT, "Which lamp is on?", ["The red lamp", "The green lamp", "The blue lamp"], "C")
rule("DirectProgram", "Which lamp is on?", "lamps_direct.txt", program(
    "#INIT: There are three lamps: a red lamp, a green lamp, and a blue lamp.\n"
    "enum lamps_sort { red_lamp, green_lamp, blue_lamp }\nlist lamps = [red_lamp, green_lamp, blue_lamp]\n"
    "fn on(lamps_sort) -> Bool\n",
    [("Exactly one lamp is on.", "assert Sum([on(l) for l in lamps]) == 1"),
     ("The red lamp is off.", "assert Not(on(red_lamp))"),
     ("The green lamp is off.", "assert Not(on(green_lamp))")],
    "sat", [("The red lamp", "on(red_lamp)"), ("The green lamp", "on(green_lamp)"), ("The blue lamp", "on(blue_lamp)")]))
rule("Instantiations", "The green lamp is off.\n>>> ConstraintExamples:", "lamps_instantiations.txt", "".join([
    inst_block("Exactly one lamp is on.", "Only the blue lamp is on.",
               "And(on(red_lamp) == False, on(green_lamp) == False, on(blue_lamp) == True)",
               "The red and blue lamps are on.", "And(on(red_lamp) == True, on(blue_lamp) == True)"),
    inst_block("The red lamp is off.", "The red lamp is off and the purple lamp is on.",
               "And(on(red_lamp) == False, on(purple_lamp) == True)",
               "The red lamp is on.", "on(red_lamp) == True"),
    inst_block("The green lamp is off.", "The green lamp is off.", "on(green_lamp) == False",
               "The green lamp is on.", "on(green_lamp) == True"),
]))
rule("SemanticRepair", "ConstraintDescription:\nThe red lamp is off.", "lamps_repair.txt", """ProblemDiscussion:
The example mentions a purple lamp, which does not exist in the scenario. The initial code and the constraint code are fine; only the example needs to change.
RepairedInitialCode:
NONE
RepairedConstraintCode:
NONE
RepairedPositiveExampleCode:
And(on(red_lamp) == False, on(blue_lamp) == True)
""")


def check_rules():
    templates = {p.stem: p.read_text() for p in (ROOT / "prompts").glob("*.txt")}
    names = {"DirectProgram": "direct_program", "ErrorRefine": "error_refine", "Decompose": "decompose",
             "IncrementalConstraint": "incremental_constraint", "OptionsCode": "options_code",
             "Instantiations": "instantiations", "SemanticRepair": "semantic_repair", "CotFallback": "cot_fallback"}
    for r in rules:
        for c in r["contains"]:
            assert c not in templates[names[r["kind"]]], (r["kind"], c)


def main():
    check_rules()
    RESP.mkdir(exist_ok=True)
    for name, text in files.items():
        (RESP / name).write_text(text)
    with open(HERE / "tasks.jsonl", "w") as f:
        for t in tasks:
            f.write(json.dumps(t) + "\n")
    (HERE / "script.json").write_text(json.dumps(rules, indent=1) + "\n")
    (ROOT / "fixtures/programs/technicians_must.ssv").write_text(
        program(TECH_INIT, tech_constraints(), "valid", MUST_OPTIONS))
    (ROOT / "fixtures/programs/technicians_must_flawed.ssv").write_text(
        program(TECH_INIT, tech_constraints(c1=C1_TOTAL), "valid", MUST_OPTIONS))
    (ROOT / "fixtures/programs/books.ssv").write_text(
        program(BOOKS_INIT, books_constraints("pos(green_book) < pos(white_book)"), "valid", BOOKS_OPTIONS))
    (ROOT / "fixtures/programs/meals_could.ssv").write_text(meals_ok)
    stacy_yolanda = [
        {"constraint": 2, "polarity": "positive", "description": "Stacy repairs radios and Yolanda repairs TVs.",
         "code": "And(repairs(Stacy, radios) == True, repairs(Yolanda, televisions) == True)"},
        {"constraint": 2, "polarity": "negative", "description": "Stacy and Yolanda both repair TVs.",
         "code": "And(repairs(Stacy, televisions) == True, repairs(Yolanda, televisions) == True)"},
    ]
    (ROOT / "fixtures/instantiations/stacy_yolanda.json").write_text(json.dumps(stacy_yolanda, indent=1) + "\n")
    (ROOT / "fixtures/instantiations/technicians.txt").write_text(TECH_INSTS)
    (ROOT / "fixtures/tasks").mkdir(exist_ok=True)
    (ROOT / "fixtures/tasks/tech_pairs.json").write_text(json.dumps(tasks[0], indent=1) + "\n")
    print(f"{len(tasks)} tasks, {len(rules)} rules")


if __name__ == "__main__":
    main()
