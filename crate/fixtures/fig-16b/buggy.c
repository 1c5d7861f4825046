int main()
{
double a;
double b;
double k;
double p;
int n;
scanf("%lf %lf %d", &a, &b, &n);
k = ((a - b) * 1.0) / n;
for (l = 1; l <= n; l++)
{
  if((l * k)<(-1))
    p+= k;

  if((l*k>=-1) && (l*k<= 1))
    p=p + (((l * k)*(l * k))*k);

  if((l * k) > 1)
    p=p + ((l * k)*(l * k))*(l*k)*k;
  }
printf("%lf", p);
return 0;
}
