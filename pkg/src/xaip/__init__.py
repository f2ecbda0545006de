"""Contrastive what-if explanations for temporal PDDL plans.

Pipeline: parse a PDDL 2.1 (subset) model and a timed plan, take a formal
contrastive question ("why A rather than B?"), compile it into a hypothetical
model, replan, validate the result against the original model, and present
the difference between the two plans. A session service keeps the growing
tree of explanations.
"""

__version__ = "0.1.0"
