/** Latest-wins resolution for concurrent in-flight requests.
 *
 * Every submission gets a sequence number; a response is delivered only
 * if no newer submission has happened since it started.
 */

export class LatestWins<T> {
  private seq = 0;

  /** Run the request; resolves with the result if still latest, or null
   * if a newer request superseded it (including while awaiting). */
  async run(request: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await request();
    return ticket === this.seq ? result : null;
  }

  /** True when no submission is newer than the given point in time. */
  get current(): number {
    return this.seq;
  }
}
