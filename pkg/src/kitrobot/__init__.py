"""KitRobot: a block-graph robot programming toolchain.

Subpackages and modules:
  catalog   - XML catalogs of program constructors and robot objects
  lll       - lexer, parser, canonical printer and typechecker for the
              robot low-level language (.lll)
  graph     - the visual block-graph IR and the .krt persistence format
  codegen   - graph to low-level-language compiler
  vm        - deterministic tick interpreter plus the simple reference
              interpreter used as its oracle
  world     - simulated ring-track transport world
  scenario  - multi-agent driver (VM steps then physics, once per tick)
  cli       - command line front door
  service   - HTTP+JSON API for the browser editor
"""

__version__ = "0.1.0"
