/** Keyboard bindings: one keypress, one discrete control step. */

import type { Action } from "./protocol.js";

export const KEY_BINDINGS: Record<string, Action> = {
  ArrowUp: "step_forward",
  ArrowDown: "step_back",
  ArrowLeft: "turn_left",
  ArrowRight: "turn_right",
  a: "strafe_left",
  d: "strafe_right",
  q: "look_up",
  e: "look_down",
};

export function actionForKey(key: string): Action | null {
  return KEY_BINDINGS[key] ?? null;
}
