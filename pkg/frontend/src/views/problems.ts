// Problem-formulation screen rules.

import type { Actor } from "../types.js";

export interface ProblemForm {
  title: string;
  initial_demand_text: string;
  internal_context: string;
  external_context: string;
}

export function canFormulate(actor: Actor | null): boolean {
  return actor !== null && actor.role === "decision_maker";
}

export function roleExplanation(actor: Actor | null): string | null {
  if (canFormulate(actor)) return null;
  return "Only a decision maker can open a decision problem.";
}

// Inline errors; an invalid form sends no request.
export function formErrors(form: ProblemForm): Partial<Record<keyof ProblemForm, string>> {
  const errors: Partial<Record<keyof ProblemForm, string>> = {};
  if (!form.title.trim()) errors.title = "Title is required.";
  if (!form.initial_demand_text.trim()) errors.initial_demand_text = "The initial demand is required.";
  return errors;
}
