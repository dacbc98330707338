/** Recommendation-card lifecycle: answer once, never double-submit. */

export type CardStatus = "pending" | "submitting" | "answered" | "stale";

export interface RecCard {
  recId: string;
  activityText: string;
  status: CardStatus;
  followed?: boolean;
}

export function newCard(recId: string, activityText: string): RecCard {
  return { recId, activityText, status: "pending" };
}

/**
 * Drive one adhere/skip click. Returns false without calling submit when the
 * card is already answered or in flight, so repeat clicks cause no second
 * request.
 */
export async function answerCard(
  card: RecCard,
  followed: boolean,
  submit: (recId: string, followed: boolean) => Promise<boolean>,
): Promise<boolean> {
  if (card.status !== "pending") return false;
  card.status = "submitting";
  try {
    const accepted = await submit(card.recId, followed);
    if (accepted) {
      card.status = "answered";
      card.followed = followed;
    } else {
      card.status = "stale";
    }
    return accepted;
  } catch (err) {
    card.status = "pending"; // network hiccup: allow a retry
    throw err;
  }
}
