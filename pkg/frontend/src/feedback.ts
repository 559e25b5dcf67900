/** The two-question feedback dialog, asked strictly in order: first whether
 * the counterfactual explanation is valid, then (only if valid) whether the
 * named concept is task-irrelevant. An invalid explanation skips the
 * relevance question and takes the demo-only path (treated as TR). */

export type FeedbackStage = "verify" | "relevance" | "done";

export interface FeedbackAnswers {
  valid: boolean;
  relevance: "TI" | "TR";
}

export class FeedbackDialog {
  private stage: FeedbackStage = "verify";
  private valid: boolean | null = null;
  private relevance: "TI" | "TR" | null = null;

  constructor(
    public readonly editDescription: string,
    public readonly rewardPrompt: string,
  ) {}

  get currentStage(): FeedbackStage {
    return this.stage;
  }

  /** Question text restates the task prompt so the user answers against
   * their own reward, not the training reward. */
  get question(): string {
    if (this.stage === "verify") {
      return (
        `Your task: "${this.rewardPrompt}". The policy succeeds when ` +
        `${this.editDescription}. Does that explain the failure?`
      );
    }
    if (this.stage === "relevance") {
      return `Does the changed concept matter for "${this.rewardPrompt}"? ` +
        `Answer TI (irrelevant, safe to vary) or TR (relevant).`;
    }
    return "";
  }

  answerVerify(valid: boolean): FeedbackStage {
    if (this.stage !== "verify") throw new Error("verification already answered");
    this.valid = valid;
    // invalid explanations skip relevance: no augmentation either way
    this.stage = valid ? "relevance" : "done";
    if (!valid) this.relevance = "TR";
    return this.stage;
  }

  answerRelevance(relevance: "TI" | "TR"): FeedbackStage {
    if (this.stage !== "relevance") throw new Error("relevance question not active");
    this.relevance = relevance;
    this.stage = "done";
    return this.stage;
  }

  result(): FeedbackAnswers {
    if (this.stage !== "done" || this.valid === null || this.relevance === null) {
      throw new Error("dialog not finished");
    }
    return { valid: this.valid, relevance: this.relevance };
  }
}
