/**
 * Instruction drafts and their client-side validation.
 *
 * The rules (and their wording) mirror the server's instruction
 * validation one for one, so a draft that passes here is one the
 * server will accept, and the submit button can stay disabled until
 * then. The server remains the authority; its rejections are still
 * displayed verbatim if the two ever disagree.
 */

export const INSTRUCTION_KINDS = [
  "pause",
  "resume",
  "run_now",
  "open_tunnel",
  "update_config",
] as const;

export type InstructionKind = (typeof INSTRUCTION_KINDS)[number];

export const REQUIRED_PARAMS: Record<InstructionKind, readonly string[]> = {
  pause: ["duration"],
  resume: [],
  run_now: ["experiment_id"],
  open_tunnel: ["host", "port"],
  update_config: ["key", "value"],
};

export interface InstructionDraft {
  device_id: string;
  kind: InstructionKind;
  params: Record<string, unknown>;
}

export function emptyDraft(): InstructionDraft {
  return { device_id: "", kind: "pause", params: {} };
}

/** Returns the problems that would make the server reject the draft. */
export function validateDraft(draft: InstructionDraft): string[] {
  const problems: string[] = [];
  if (!draft.device_id) {
    problems.push("instruction.device_id: must be non-empty");
  }
  if (!(INSTRUCTION_KINDS as readonly string[]).includes(draft.kind)) {
    problems.push("instruction.kind: unknown value");
    return problems;
  }
  for (const key of REQUIRED_PARAMS[draft.kind]) {
    const value = draft.params[key];
    if (value === undefined || value === null || value === "") {
      problems.push(
        `instruction.params.${key}: required for kind ${draft.kind}`,
      );
    }
  }
  if (draft.kind === "pause" && draft.params["duration"] !== undefined) {
    const duration = draft.params["duration"];
    if (typeof duration !== "number" || !isFinite(duration) || duration <= 0) {
      problems.push(
        "instruction.params.duration: must be a positive number of seconds",
      );
    }
  }
  return problems;
}
