"""
Breadth-Depth Tree Planner: exact values and optimal sampling allocations for large decision trees
"""

__version__ = "0.1.0"
