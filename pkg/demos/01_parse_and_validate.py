"""
Parsing and static validation
=============================

Lex a G-code program into blocks, then run the static check battery:
syntax against the recognized-command registry, unreachable code after
M30, rapids while the tool is engaged, and drilling-height safety.
"""

from gcodegen import parse_program, validate

good = """\
G21
G90
G0 Z5
G0 X0 Y0
M3 S1200
G1 Z-2 F100
G1 X50 Y0
G1 Z5 F100
M5
M30
"""

program = parse_program(good)
print(f"{len(program.blocks)} blocks parsed")
for block in program.blocks[:4]:
    print(" ", block.line_no, [(w.letter, w.value) for w in block.words])

report = validate(program)
print("clean program passes:", report.passed)

# Now break it three different ways: a malformed command (the classic
# G022-for-G02 typo), code after M30, and a rapid move at depth.
bad = """\
G21
G90
G0 X0 Y0
M3 S1200
G1 Z-2 F100
G022 X5 Y5
G0 X50
M30
G1 X99
"""

report = validate(parse_program(bad))
print("\nbroken program passes:", report.passed)
for line in report.to_lines():
    print(" ", line)

# Note the gate: only the SYNTAX diagnostic shows. Fix the typo and the
# deeper checks (rapid-while-cutting, unreachable) get their turn.
fixed = bad.replace("G022 X5 Y5", "G1 X5 Y5")
for line in validate(parse_program(fixed)).to_lines():
    print(" after fixing syntax:", line)
