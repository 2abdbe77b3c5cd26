"""Parsing, progression and closures on inspection-style instructions.

Run:  python demos/01_ltl_progression.py
"""

from specrl.ltl import SymbolTable, closure, parse, progress, to_string

symbols = SymbolTable(["read_meter", "check_rust_valve", "check_leak_pipe"])

# A sequential instruction: eventually read the meter, then eventually
# check the valve for rust.
task = parse("F (read_meter & F check_rust_valve)", symbols)
print("task:            ", to_string(task, symbols))

# Nothing satisfied: the obligation is unchanged.
phi = progress(task, frozenset())
print("after {}:        ", to_string(phi, symbols))

# Satisfying the first symbol rewrites the formula to what remains.
meter = frozenset({symbols.id_of("read_meter")})
phi = progress(task, meter)
print("after {meter}:   ", to_string(phi, symbols))

# Satisfying the second symbol completes the task.
valve = frozenset({symbols.id_of("check_rust_valve")})
phi = progress(phi, valve)
print("after {valve}:   ", to_string(phi, symbols))

# The closure is every formula reachable by progression; it is what the
# task-embedding table is indexed by.
cl = closure([task])
print("\nclosure of the task:")
for line in cl.to_lines(symbols):
    print("  ", line)

# Until and negation (on atoms) are available too.
guarded = parse("!check_leak_pipe U read_meter", symbols)
print("\nguarded task:    ", to_string(guarded, symbols))
print("leak first:      ", to_string(
    progress(guarded, frozenset({symbols.id_of("check_leak_pipe")})), symbols))
print("meter first:     ", to_string(progress(guarded, meter), symbols))
