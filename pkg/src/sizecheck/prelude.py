"""Built-in inductive types and helper globals, written in the surface
language and checked through the normal pipeline at load time."""

from __future__ import annotations

from .frontend import check_text
from .inference import Checker

PRELUDE = """\
Inductive Nat : Set :=
  | O : Nat
  | S : Nat -> Nat.

Inductive Bool : Set :=
  | true : Bool
  | false : Bool.

Inductive List (A : Set) : Set :=
  | Nil : List A
  | Cons : A -> List A -> List A.

Inductive Vector (A : Type) : Nat -> Type :=
  | VNil : Vector A O
  | VCons : forall (n : Nat), A -> Vector A n -> Vector A (S n).

CoInductive Stream (A : Set) : Set :=
  | SCons : A -> Stream A -> Stream A.

Axiom gtb : Nat -> Nat -> Bool.
Axiom leb : Nat -> Nat -> Bool.

Fixpoint modulo (n : Nat) (m : Nat) {struct 2} : Nat :=
  match m return Nat with
  | O => O
  | S m' => S (modulo n m')
  end.
"""


def load_prelude(checker: Checker) -> None:
    """Install the prelude.  It is vetted, so positivity warnings stay off."""
    check_text(checker, PRELUDE, warn=None)
