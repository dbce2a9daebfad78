'''
kwall: exact K-stability invariants for log del Pezzo surface pairs.

The engine computes log discrepancies A, expected vanishing orders S and the
difference beta = A - S as exact affine functions of the boundary coefficient,
and solves for the coefficients where beta changes sign (the moduli walls).
'''

__version__ = '0.1.0'
