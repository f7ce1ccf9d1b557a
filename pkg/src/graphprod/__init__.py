"""Graph products of finite groups over simplicial complexes: free kernels of
the projection onto the direct product, their commutator bases, the induced
automorphism and matrix representations, homology cross-checks, and reports
on transitively commutative groups."""

__version__ = "0.1.0"
