"""On-demand constant creation in a geospatial scenario.

Two agents share a starting location.  The fast car moves left and arrives
after one time unit; the slow foot patrol moves right and takes two.  The
target locations do not exist when the run starts: the movement rules
carry skolem bindings, and the constructor names the new location (and the
linking left/right edge) the moment the delayed head applies.
"""

from latreason import run
from latreason.scenarios.geo import geo_config, geo_constructors, geo_program

result = run(geo_program(), geo_config(), geo_constructors())

print("locations over time:")
for t, rows in enumerate(result.history):
    ats = sorted(f"at{s}={iv}" for s, p, iv, _ in rows if p == "at")
    print(f"  t={t}:")
    for a in ats:
        print(f"    {a}")

print()
print("constants created during reasoning (name -> time):")
for subject, t in sorted(result.store.created_at.items(), key=lambda kv: str(kv[0])):
    if isinstance(subject, str):
        print(f"  {subject} -> t={t}")

print()
print("total materialized atoms:", len(result.store.ever),
      "(a fully grounded map would carry every location up front)")
