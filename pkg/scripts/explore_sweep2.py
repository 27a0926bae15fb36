"""Dev exploration round 2: mid-density first, skim budget."""
import sys, time
import networkx as nx
from failover_lab.graph import Graph
from failover_lab.sweep import candidate_pairs, sweep
from failover_lab.synthesis import replay


def atlas7():
    for G in nx.graph_atlas_g():
        if G.number_of_nodes() == 7 and nx.is_connected(G) and nx.check_planarity(G)[0]:
            yield Graph(7, [tuple(e) for e in G.edges()])


cands = list(atlas7())
pairs = list(candidate_pairs(cands))
# mid-density first: the known-impossible shapes sit around m = 12..13
pairs.sort(key=lambda gt: (abs(gt[0].m - 12.4), sorted(gt[0].edges), gt[1]))
print(f"pairs: {len(pairs)}", flush=True)

budget = int(sys.argv[1]) if len(sys.argv) > 1 else 80_000
t0 = time.time()
stats = {"unsat": 0, "found": 0, "inconclusive": 0}
for i, (g, tgt) in enumerate(pairs):
    rep = sweep([(g, tgt)], max_failures=4, budget_per_instance=budget)
    e = rep.entries[0]
    stats[e.status] += 1
    if e.status == "unsat":
        ok = replay(rep.witness[2].certificate)
        print(f"[{i}] UNSAT m={g.m} tgt={tgt} nodes={e.search_nodes} replay={ok} edges={sorted(g.edges)}", flush=True)
        if stats["unsat"] >= 5:
            break
    if i % 50 == 0:
        print(f"[{i}] {stats} t={time.time()-t0:.0f}s", flush=True)
print(f"done: {stats} t={time.time()-t0:.0f}s", flush=True)
