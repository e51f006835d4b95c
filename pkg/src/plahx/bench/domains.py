"""PDDL domain models for the four benchmark suites."""

BLOCKS = """\
(define (domain blocks)
  (:requirements :strips :typing)
  (:types block)
  (:predicates
    (on ?x - block ?y - block)
    (ontable ?x - block)
    (clear ?x - block)
    (handempty)
    (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down
    :parameters (?x - block)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
"""

HANOI = """\
(define (domain hanoi)
  (:requirements :strips :typing)
  (:types disk rod - place)
  (:predicates
    (on ?d - disk ?p - place)
    (clear ?p - place)
    (smaller ?d - disk ?p - place))
  (:action move
    :parameters (?d - disk ?from - place ?to - place)
    :precondition (and (on ?d ?from) (clear ?d) (clear ?to) (smaller ?d ?to))
    :effect (and (on ?d ?to) (clear ?from) (not (on ?d ?from)) (not (clear ?to)))))
"""

GRIPPERS = """\
(define (domain grippers)
  (:requirements :strips :typing)
  (:types room box gripper)
  (:predicates
    (at-robby ?r - room)
    (at ?b - box ?r - room)
    (free ?g - gripper)
    (carry ?b - box ?g - gripper))
  (:action move
    :parameters (?from - room ?to - room)
    :precondition (at-robby ?from)
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - box ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - box ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g)))))
"""

REARRANGEMENT = """\
(define (domain rearrangement)
  (:requirements :strips :typing)
  (:types block bowl)
  (:predicates
    (on-table ?b - block)
    (in ?b - block ?w - bowl)
    (holding ?b - block)
    (hand-empty))
  (:action pick-from-table
    :parameters (?b - block)
    :precondition (and (on-table ?b) (hand-empty))
    :effect (and (holding ?b) (not (on-table ?b)) (not (hand-empty))))
  (:action pick-from-bowl
    :parameters (?b - block ?w - bowl)
    :precondition (and (in ?b ?w) (hand-empty))
    :effect (and (holding ?b) (not (in ?b ?w)) (not (hand-empty))))
  (:action put-in-bowl
    :parameters (?b - block ?w - bowl)
    :precondition (holding ?b)
    :effect (and (in ?b ?w) (hand-empty) (not (holding ?b)))))
"""

DOMAINS = {
    "blocks": BLOCKS,
    "hanoi": HANOI,
    "grippers": GRIPPERS,
    "rearrangement": REARRANGEMENT,
}
